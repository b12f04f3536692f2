#include "geonet/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "geonet/errors.hpp"
#include "geonet/polyline.hpp"

namespace geonet {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "shape parameter " << name << " must be positive and finite, got " << value;
    throw InvalidInput(msg.str());
  }
}

// Surfaces given as the zero set of a smooth field F with nonvanishing
// gradient on the surface.
class ImplicitSurface : public Manifold {
 public:
  Point project(const Vec3& x) const override {
    Vec3 y = x;
    if (!near_surface(y)) y = coarse_project(y);
    return newton_foot(y);
  }

  Vec3 unit_normal(const Point& p) const override { return gradient(p).normalized(); }

  Vec3 tangent_project(const Point& p, const Vec3& v) const override {
    const Vec3 n = unit_normal(p);
    return v - v.dot(n) * n;
  }

  double step_distance(const Point& p, const Point& q) const override {
    const Vec3 d = q - p;
    const double c = d.norm();
    if (c == 0.0) return 0.0;
    const Vec3 u = d / c;
    const double kp = normal_curvature(p, u);
    const double kq = normal_curvature(q, u);
    // Arc of a curve with curvature k over chord c: c (1 + k^2 c^2 / 24 + ...).
    const double k2 = 0.5 * (kp * kp + kq * kq);
    return c * (1.0 + k2 * c * c / 24.0);
  }

  Point midpoint(const Point& p, const Point& q) const override { return project(0.5 * (p + q)); }

  Vec3 geodesic_acceleration(const Point& x, const Vec3& v) const override {
    const Vec3 g = gradient(x);
    return -(v.dot(hessian(x) * v) / g.squaredNorm()) * g;
  }

  double surface_residual(const Point& p) const override {
    return std::abs(field(p)) / gradient(p).norm() / min_shape_parameter();
  }

 protected:
  virtual double field(const Vec3& x) const = 0;
  virtual Vec3 gradient(const Vec3& x) const = 0;
  virtual Eigen::Matrix3d hessian(const Vec3& x) const = 0;
  /// Globally defined (if crude) map onto the surface.
  virtual Point coarse_project(const Vec3& x) const = 0;

  double normal_curvature(const Point& x, const Vec3& dir) const {
    const Vec3 g = gradient(x);
    const double gn = g.norm();
    const Vec3 n = g / gn;
    Vec3 u = dir - dir.dot(n) * n;
    const double un = u.norm();
    if (un == 0.0) return 0.0;
    u /= un;
    return u.dot(hessian(x) * u) / gn;
  }

 private:
  bool near_surface(const Vec3& x) const {
    const Vec3 g = gradient(x);
    const double gn = g.norm();
    return gn > 0.0 && std::abs(field(x)) / gn < 0.05 * min_shape_parameter();
  }

  Point newton_foot(Vec3 y) const {
    const double tol = 1e-15 * min_shape_parameter();
    for (int it = 0; it < 60; ++it) {
      const Vec3 g = gradient(y);
      const double g2 = g.squaredNorm();
      if (!(g2 > 0.0) || !std::isfinite(g2)) {
        throw NumericalError("surface projection: vanishing gradient");
      }
      const Vec3 step = (field(y) / g2) * g;
      y -= step;
      if (step.norm() <= tol) return y;
    }
    if (!y.allFinite()) throw NumericalError("surface projection diverged");
    return y;
  }
};

class RoundSphere final : public ImplicitSurface {
 public:
  explicit RoundSphere(double radius) : radius_(radius) { require_positive(radius, "radius"); }

  ManifoldKind kind() const override { return ManifoldKind::RoundSphere; }
  std::vector<std::pair<std::string, double>> shape_parameters() const override {
    return {{"radius", radius_}};
  }
  double min_shape_parameter() const override { return radius_; }

  Point project(const Vec3& x) const override {
    const double n = x.norm();
    if (!(n > 1e-12 * radius_) || !std::isfinite(n)) {
      throw NumericalError("sphere projection of the centre is undefined");
    }
    return (radius_ / n) * x;
  }

  double step_distance(const Point& p, const Point& q) const override {
    const double c = (q - p).norm();
    return 2.0 * radius_ * std::asin(std::min(1.0, 0.5 * c / radius_));
  }

  std::optional<double> exact_diameter() const override { return kPi * radius_; }
  double coarse_span_limit() const override { return 0.5 * radius_; }

  Point sample(std::mt19937_64& rng) const override {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 x;
    do {
      x = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (x.norm() < 1e-6);
    return project(x);
  }

 protected:
  double field(const Vec3& x) const override { return x.squaredNorm() - radius_ * radius_; }
  Vec3 gradient(const Vec3& x) const override { return 2.0 * x; }
  Eigen::Matrix3d hessian(const Vec3&) const override {
    return 2.0 * Eigen::Matrix3d::Identity();
  }
  Point coarse_project(const Vec3& x) const override { return project(x); }

 private:
  double radius_;
};

class Ellipsoid final : public ImplicitSurface {
 public:
  Ellipsoid(double a, double b, double c) : axes_(a, b, c) {
    require_positive(a, "a");
    require_positive(b, "b");
    require_positive(c, "c");
    inv2_ = axes_.cwiseProduct(axes_).cwiseInverse();
  }

  ManifoldKind kind() const override { return ManifoldKind::Ellipsoid; }
  std::vector<std::pair<std::string, double>> shape_parameters() const override {
    return {{"a", axes_.x()}, {"b", axes_.y()}, {"c", axes_.z()}};
  }
  double min_shape_parameter() const override { return axes_.minCoeff(); }
  double coarse_span_limit() const override { return 0.5 * axes_.minCoeff(); }

  // Radial image of a Gaussian direction; not area-uniform.
  Point sample(std::mt19937_64& rng) const override {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 x;
    do {
      x = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (x.norm() < 1e-6);
    return project(x);
  }

 protected:
  double field(const Vec3& x) const override { return x.cwiseProduct(x).dot(inv2_) - 1.0; }
  Vec3 gradient(const Vec3& x) const override { return 2.0 * x.cwiseProduct(inv2_); }
  Eigen::Matrix3d hessian(const Vec3&) const override { return (2.0 * inv2_).asDiagonal(); }
  Point coarse_project(const Vec3& x) const override {
    const double s = x.cwiseProduct(x).dot(inv2_);
    if (!(s > 0.0)) throw NumericalError("ellipsoid projection of the centre is undefined");
    return x / std::sqrt(s);
  }

 private:
  Vec3 axes_;
  Vec3 inv2_;
};

// Axis z; tube of radius r around the circle of radius R in the xy-plane.
class TorusOfRevolution final : public ImplicitSurface {
 public:
  TorusOfRevolution(double major, double minor) : major_(major), minor_(minor) {
    require_positive(major, "major_radius");
    require_positive(minor, "minor_radius");
    if (!(minor < major)) throw InvalidInput("torus of revolution needs minor_radius < major_radius");
  }

  ManifoldKind kind() const override { return ManifoldKind::TorusOfRevolution; }
  std::vector<std::pair<std::string, double>> shape_parameters() const override {
    return {{"major_radius", major_}, {"minor_radius", minor_}};
  }
  double min_shape_parameter() const override { return minor_; }
  double coarse_span_limit() const override { return 0.5 * minor_; }

  Point project(const Vec3& x) const override {
    const double rho = std::hypot(x.x(), x.y());
    if (!(rho > 1e-12 * major_)) throw NumericalError("torus projection on the axis is undefined");
    const Vec3 centre(major_ * x.x() / rho, major_ * x.y() / rho, 0.0);
    const Vec3 d = x - centre;
    const double dn = d.norm();
    if (!(dn > 1e-12 * minor_)) throw NumericalError("torus projection on the core circle is undefined");
    return centre + (minor_ / dn) * d;
  }

  Point sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const double theta = angle(rng);
    const double phi = angle(rng);
    const double w = major_ + minor_ * std::cos(phi);
    return {w * std::cos(theta), w * std::sin(theta), minor_ * std::sin(phi)};
  }

 protected:
  double field(const Vec3& x) const override {
    const double rho = std::hypot(x.x(), x.y());
    return (rho - major_) * (rho - major_) + x.z() * x.z() - minor_ * minor_;
  }
  Vec3 gradient(const Vec3& x) const override {
    const double rho = std::hypot(x.x(), x.y());
    const double f = 2.0 * (rho - major_) / rho;
    return {f * x.x(), f * x.y(), 2.0 * x.z()};
  }
  Eigen::Matrix3d hessian(const Vec3& x) const override {
    const double rho = std::hypot(x.x(), x.y());
    const double d1 = 2.0 * (rho - major_);  // f'(rho)
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    const double xy[2] = {x.x(), x.y()};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double xx = xy[i] * xy[j] / (rho * rho);
        h(i, j) = 2.0 * xx + d1 * ((i == j ? 1.0 : 0.0) - xx) / rho;
      }
    }
    h(2, 2) = 2.0;
    return h;
  }
  Point coarse_project(const Vec3& x) const override { return project(x); }

 private:
  double major_;
  double minor_;
};

// Chart [0, Lx) x [0, Ly) with the Euclidean metric; points carry z = 0.
class FlatTorus final : public Manifold {
 public:
  FlatTorus(double lx, double ly) : period_(lx, ly) {
    require_positive(lx, "period_x");
    require_positive(ly, "period_y");
  }

  ManifoldKind kind() const override { return ManifoldKind::FlatTorus; }
  int ambient_dimension() const override { return 2; }
  std::vector<std::pair<std::string, double>> shape_parameters() const override {
    return {{"period_x", period_.x()}, {"period_y", period_.y()}};
  }
  double min_shape_parameter() const override { return period_.minCoeff(); }

  Point project(const Vec3& x) const override {
    if (!x.allFinite()) throw NumericalError("non-finite chart coordinates");
    return {reduce(x.x(), period_.x()), reduce(x.y(), period_.y()), 0.0};
  }
  Vec3 tangent_project(const Point&, const Vec3& v) const override { return {v.x(), v.y(), 0.0}; }
  Vec3 unit_normal(const Point&) const override { return Vec3::UnitZ(); }

  Vec3 chord(const Point& p, const Point& q) const override {
    return {wrap(q.x() - p.x(), period_.x()), wrap(q.y() - p.y(), period_.y()), 0.0};
  }
  double step_distance(const Point& p, const Point& q) const override { return chord(p, q).norm(); }
  Point midpoint(const Point& p, const Point& q) const override {
    return project(p + 0.5 * chord(p, q));
  }
  Vec3 geodesic_acceleration(const Point&, const Vec3&) const override { return Vec3::Zero(); }

  double surface_residual(const Point& p) const override {
    double r = std::abs(p.z());
    if (p.x() < 0.0 || p.x() >= period_.x()) r += std::abs(p.x() - reduce(p.x(), period_.x()));
    if (p.y() < 0.0 || p.y() >= period_.y()) r += std::abs(p.y() - reduce(p.y(), period_.y()));
    return r / min_shape_parameter();
  }

  Point sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return project(Vec3(u(rng) * period_.x(), u(rng) * period_.y(), 0.0));
  }
  Point antipode(const Point& p) const override {
    return project(p + Vec3(0.5 * period_.x(), 0.5 * period_.y(), 0.0));
  }
  std::optional<double> exact_diameter() const override { return 0.5 * period_.norm(); }
  double coarse_span_limit() const override { return 0.25 * period_.minCoeff(); }

  std::optional<Polyline> direct_seed(const Point& p, const Point& q,
                                      double spacing) const override {
    return line(p, chord(p, q), spacing);
  }

  // Straight lines to the next-nearest lattice images of q, nearest first.
  std::vector<Polyline> fan_seeds(const Point& p, const Point& q, int count, double phase,
                                  double spacing) const override {
    const Vec3 base = chord(p, q);
    std::vector<Vec3> shifts;
    for (int i = -2; i <= 2; ++i) {
      for (int j = -2; j <= 2; ++j) {
        if (i == 0 && j == 0) continue;
        shifts.emplace_back(base + Vec3(i * period_.x(), j * period_.y(), 0.0));
      }
    }
    std::stable_sort(shifts.begin(), shifts.end(),
                     [](const Vec3& a, const Vec3& b) { return a.norm() < b.norm(); });
    const int avail = std::min(count, static_cast<int>(shifts.size()));
    std::vector<Polyline> out;
    if (avail <= 0) return out;
    const int turn = static_cast<int>(std::floor(phase / (2.0 * kPi) * avail));
    const int offset = ((turn % avail) + avail) % avail;
    for (int k = 0; k < avail; ++k) {
      out.push_back(line(p, shifts[static_cast<std::size_t>((k + offset) % avail)], spacing));
    }
    return out;
  }

 private:
  static double reduce(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
  }
  static double wrap(double d, double period) { return d - period * std::round(d / period); }

  Polyline line(const Point& p, const Vec3& d, double spacing) const {
    const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / spacing)));
    Polyline out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) out.push_back(project(p + (static_cast<double>(i) / n) * d));
    return out;
  }

  Eigen::Vector2d period_;
};

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::RoundSphere: return "round-sphere";
    case ManifoldKind::Ellipsoid: return "ellipsoid";
    case ManifoldKind::FlatTorus: return "flat-torus";
    case ManifoldKind::TorusOfRevolution: return "torus-of-revolution";
  }
  return "unknown";
}

ManifoldKind manifold_kind_from_string(std::string_view name) {
  if (name == "round-sphere") return ManifoldKind::RoundSphere;
  if (name == "ellipsoid") return ManifoldKind::Ellipsoid;
  if (name == "flat-torus") return ManifoldKind::FlatTorus;
  if (name == "torus-of-revolution") return ManifoldKind::TorusOfRevolution;
  throw InvalidInput("unknown manifold kind '" + std::string(name) + "'");
}

std::pair<Vec3, Vec3> Manifold::tangent_basis(const Point& p, const Vec3& hint) const {
  const Vec3 n = unit_normal(p);
  Vec3 e1 = tangent_project(p, hint);
  if (!(e1.norm() > 1e-9 * (hint.norm() + 1.0))) {
    int axis = 0;
    n.cwiseAbs().minCoeff(&axis);
    e1 = tangent_project(p, Vec3::Unit(axis));
  }
  e1.normalize();
  return {e1, n.cross(e1)};
}

std::optional<Polyline> Manifold::direct_seed(const Point& p, const Point& q,
                                              double spacing) const {
  const Vec3 d = chord(p, q);
  const double c = d.norm();
  const int n = std::max(1, static_cast<int>(std::ceil(c / spacing)));
  Polyline out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back(p);
  try {
    for (int i = 1; i < n; ++i) out.push_back(project(p + (static_cast<double>(i) / n) * d));
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  out.push_back(q);
  // A chord passing close to a singular point of the projection shows up as
  // a jump between consecutive projected points.
  const double max_gap = 8.0 * c / n;
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (!out[i].allFinite() || (out[i + 1] - out[i]).norm() > max_gap) return std::nullopt;
  }
  return out;
}

std::vector<Polyline> Manifold::fan_seeds(const Point& p, const Point& q, int count,
                                          double phase, double spacing) const {
  const auto [e1, e2] = tangent_basis(p, chord(p, q));
  const double reach = 0.5 * std::max(step_distance(p, q), spacing);
  std::vector<Polyline> out;
  for (int j = 0; j < count; ++j) {
    const double phi = phase + 2.0 * kPi * j / count;
    const Vec3 u = std::cos(phi) * e1 + std::sin(phi) * e2;
    const ShootResult leg = geodesic_shoot(*this, p, u, reach);
    auto rest = direct_seed(leg.end, q, spacing);
    if (!rest) continue;
    Polyline seed = leg.path;
    seed.insert(seed.end(), rest->begin() + 1, rest->end());
    out.push_back(std::move(seed));
  }
  return out;
}

ManifoldPtr make_round_sphere(double radius) { return std::make_shared<RoundSphere>(radius); }
ManifoldPtr make_ellipsoid(double a, double b, double c) {
  return std::make_shared<Ellipsoid>(a, b, c);
}
ManifoldPtr make_flat_torus(double lx, double ly) { return std::make_shared<FlatTorus>(lx, ly); }
ManifoldPtr make_torus_of_revolution(double major, double minor) {
  return std::make_shared<TorusOfRevolution>(major, minor);
}

ManifoldPtr make_manifold(ManifoldKind kind, const std::map<std::string, double>& params) {
  auto get = [&](const char* name) {
    const auto it = params.find(name);
    if (it == params.end()) {
      throw InvalidInput(to_string(kind) + " descriptor is missing '" + name + "'");
    }
    return it->second;
  };
  switch (kind) {
    case ManifoldKind::RoundSphere: return make_round_sphere(get("radius"));
    case ManifoldKind::Ellipsoid: return make_ellipsoid(get("a"), get("b"), get("c"));
    case ManifoldKind::FlatTorus: return make_flat_torus(get("period_x"), get("period_y"));
    case ManifoldKind::TorusOfRevolution:
      return make_torus_of_revolution(get("major_radius"), get("minor_radius"));
  }
  throw InvalidInput("unknown manifold kind");
}

// ---------------------------------------------------------------------------
// Geodesic operations

ShootResult geodesic_shoot(const Manifold& m, const Point& p, const Vec3& v, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("geodesic_shoot: arclength must be >= 0");
  const double speed = v.norm();
  if (std::abs(speed - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "geodesic_shoot: direction must be unit length, |v| = " << speed;
    throw InvalidInput(msg.str());
  }
  if (std::abs(v.dot(m.unit_normal(p))) > 1e-6) {
    throw InvalidInput("geodesic_shoot: direction is not tangent at the base point");
  }
  ShootResult out{p, {p, v}, {p}};
  if (t == 0.0) return out;

  const double h_max = std::min(m.base_step(), t / 200.0);
  const long steps = std::max(1L, static_cast<long>(std::ceil(t / h_max)));
  const double h = t / static_cast<double>(steps);
  out.path.reserve(static_cast<std::size_t>(steps) + 1);

  // Integrate in unreduced coordinates; only the stored nodes are projected.
  Vec3 x = p;
  Vec3 vel = v;
  for (long i = 0; i < steps; ++i) {
    const Vec3 k1x = vel;
    const Vec3 k1v = m.geodesic_acceleration(x, vel);
    const Vec3 k2x = vel + 0.5 * h * k1v;
    const Vec3 k2v = m.geodesic_acceleration(x + 0.5 * h * k1x, k2x);
    const Vec3 k3x = vel + 0.5 * h * k2v;
    const Vec3 k3v = m.geodesic_acceleration(x + 0.5 * h * k2x, k3x);
    const Vec3 k4x = vel + h * k3v;
    const Vec3 k4v = m.geodesic_acceleration(x + h * k3x, k4x);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    vel += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!x.allFinite() || !vel.allFinite()) {
      std::ostringstream msg;
      msg << "geodesic_shoot: non-finite state at step " << i << " of " << steps << " (h = " << h
          << ")";
      throw NumericalError(msg.str());
    }
    x = m.project(x);
    vel = m.tangent_project(x, vel);
    out.path.push_back(x);
  }
  const double drift = std::abs(vel.norm() - 1.0);
  if (drift > 1e-6) {
    std::ostringstream msg;
    msg << "geodesic_shoot: speed drifted by " << drift << " over " << steps << " steps (h = " << h
        << ")";
    throw NumericalError(msg.str());
  }
  out.end = x;
  out.velocity = {x, vel};
  return out;
}

namespace {

GeodesicSegment finish_segment(const Manifold& m, Polyline pts) {
  GeodesicSegment seg;
  seg.length = polyline_length(m, pts);
  seg.start_tangent = front_tangent(m, pts);
  seg.end_tangent = back_tangent(m, pts);
  seg.polyline = std::move(pts);
  return seg;
}

// Coarse-to-fine relaxation of a seed with fixed endpoints; the final
// spacing is min(base step, length / 200). Each level runs midpoint sweeps
// until the curve is roughly straight, then Newton polishing; sweeps alone
// take over when Newton stalls.
void relax_level(const Manifold& m, Polyline& pts, double spacing, double tol) {
  constexpr int kMaxSweeps = 20000;
  relax_until_converged(m, pts, std::max(tol, 1e-4 * spacing), kMaxSweeps);
  if (newton_polish(m, pts, tol, 40).converged) return;
  const RelaxOutcome res = relax_until_converged(m, pts, tol, kMaxSweeps);
  if (res.converged || newton_polish(m, pts, tol, 40).converged) return;
  std::ostringstream msg;
  msg << "shortest_geodesic: relaxation did not converge at spacing " << spacing;
  throw ConvergenceError(msg.str(), pts);
}

double max_gap(const Manifold& m, const Polyline& pts) {
  double out = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) out = std::max(out, m.step_distance(pts[i], pts[i + 1]));
  return out;
}

Polyline relax_seed(const Manifold& m, const Polyline& seed) {
  const double scale = m.min_shape_parameter();
  double length = polyline_length(m, seed);
  double h = std::min(m.base_step(), length / 200.0);
  double spacing = std::max(h, length / 16.0);
  const int segments = std::max(2, static_cast<int>(std::ceil(length / spacing)));
  Polyline pts = resample_uniform(m, seed, segments);

  for (int round = 0; round < 64; ++round) {
    const bool finest = spacing <= h * (1.0 + 1e-12);
    relax_level(m, pts, spacing, (finest ? 1e-12 : 1e-9) * scale);
    length = polyline_length(m, pts);
    const double h_new = std::min(m.base_step(), length / 200.0);
    if (finest && h_new >= h * (1.0 - 1e-9) && max_gap(m, pts) <= h * (1.0 + 1e-9)) break;
    h = std::min(h, h_new);
    spacing = std::max(h, 0.5 * spacing);
    // Even spacing keeps the Newton system well conditioned.
    pts = resample_uniform(m, pts, std::max(2, static_cast<int>(std::ceil(length / spacing * (1.0 - 1e-12)))));
  }
  return pts;
}

}  // namespace

GeodesicSegment shortest_geodesic(const Manifold& m, const Point& p, const Point& q,
                                  const std::optional<Polyline>& hint) {
  if (m.chord(p, q).norm() <= 1e-13 * m.min_shape_parameter()) {
    GeodesicSegment seg;
    seg.polyline = {p, q};
    return seg;
  }
  Polyline seed;
  if (hint && hint->size() >= 2) {
    seed = *hint;
    seed.front() = p;
    seed.back() = q;
  } else if (auto direct = m.direct_seed(p, q, m.base_step())) {
    seed = std::move(*direct);
  } else {
    auto fan = m.fan_seeds(p, q, kDistanceFanSize, 0.0, m.base_step());
    if (fan.empty()) throw NumericalError("shortest_geodesic: no usable seed polyline");
    seed = std::move(fan.front());
  }
  return finish_segment(m, relax_seed(m, seed));
}

GeodesicSegment minimal_geodesic(const Manifold& m, const Point& p, const Point& q) {
  if (m.chord(p, q).norm() <= 1e-13 * m.min_shape_parameter()) return shortest_geodesic(m, p, q);
  std::vector<Polyline> seeds;
  if (auto direct = m.direct_seed(p, q, m.base_step())) seeds.push_back(std::move(*direct));
  for (auto& s : m.fan_seeds(p, q, kDistanceFanSize, 0.0, m.base_step())) {
    seeds.push_back(std::move(s));
  }
  if (seeds.empty()) throw NumericalError("minimal_geodesic: no usable seed polyline");

  std::optional<GeodesicSegment> best;
  std::optional<ConvergenceError> last_failure;
  for (const auto& seed : seeds) {
    try {
      GeodesicSegment seg = finish_segment(m, relax_seed(m, seed));
      // Ties (cut locus) keep the lowest-index seed.
      if (!best || seg.length < best->length * (1.0 - 1e-12)) best = std::move(seg);
    } catch (const ConvergenceError& e) {
      last_failure = e;
    }
  }
  if (!best) throw *last_failure;
  return *best;
}

double distance(const Manifold& m, const Point& p, const Point& q) {
  return minimal_geodesic(m, p, q).length;
}

DiameterEstimate diameter_estimate(const Manifold& m, int sample_count, std::uint64_t seed) {
  if (sample_count < 2) throw InvalidInput("diameter_estimate: sample_count must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(sample_count));
  for (int i = 0; i < sample_count; ++i) pts.push_back(m.sample(rng));

  // Rank pairs by a cheap proxy (chord, or exact minimal-image distance in a
  // chart), then measure the leading candidates intrinsically.
  struct Pair {
    double proxy;
    int i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(sample_count) * (sample_count - 1) / 2);
  for (int i = 0; i < sample_count; ++i) {
    for (int j = i + 1; j < sample_count; ++j) {
      pairs.push_back({m.chord(pts[i], pts[j]).norm(), i, j});
    }
  }
  constexpr std::size_t kCandidates = 24;
  const std::size_t keep = std::min(kCandidates, pairs.size());
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(keep), pairs.end(),
                    [](const Pair& a, const Pair& b) {
                      return a.proxy > b.proxy || (a.proxy == b.proxy && (a.i < b.i || (a.i == b.i && a.j < b.j)));
                    });
  DiameterEstimate out;
  out.exact = m.exact_diameter();
  for (std::size_t k = 0; k < keep; ++k) {
    out.value = std::max(out.value, distance(m, pts[pairs[k].i], pts[pairs[k].j]));
  }
  return out;
}

double angle_between(const Manifold& m, const TangentVector& u, const TangentVector& v) {
  if (m.chord(u.base, v.base).norm() > 1e-9 * m.min_shape_parameter()) {
    throw InvalidInput("angle_between: tangent vectors have different base points");
  }
  const double nu = u.components.norm();
  const double nv = v.components.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw InvalidInput("angle_between: zero tangent vector");
  // atan2 form of arccos(<u,v>/|u||v|), accurate near 0 and pi.
  const Vec3 a = u.components / nu;
  const Vec3 b = v.components / nv;
  return std::atan2(a.cross(b).norm(), m.inner(u.base, a, b));
}

}  // namespace geonet
