#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace geonet {

using Vec3 = Eigen::Vector3d;
/// Embedding coordinates for surfaces in R^3; chart coordinates (x, y, 0)
/// reduced to the fundamental domain for the flat torus.
using Point = Eigen::Vector3d;
using Polyline = std::vector<Point>;

enum class ManifoldKind { RoundSphere, Ellipsoid, FlatTorus, TorusOfRevolution };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(std::string_view name);

struct TangentVector {
  Point base = Point::Zero();
  Vec3 components = Vec3::Zero();
};

struct GeodesicSegment {
  Polyline polyline;
  double length = 0.0;
  /// Unit tangents at the two endpoints, pointing into the segment. Zero for
  /// a degenerate segment.
  Vec3 start_tangent = Vec3::Zero();
  Vec3 end_tangent = Vec3::Zero();
};

/// A closed Riemannian 2-manifold model. Values are immutable after
/// construction and may be shared freely between threads.
///
/// All shipped models carry the metric induced from the ambient (or chart)
/// Euclidean inner product, so tangent vectors are plain 3-vectors and the
/// metric inner product is the dot product.
class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual ManifoldKind kind() const = 0;
  int dimension() const { return 2; }
  virtual int ambient_dimension() const { return 3; }

  /// Named shape parameters in descriptor order.
  virtual std::vector<std::pair<std::string, double>> shape_parameters() const = 0;
  virtual double min_shape_parameter() const = 0;

  /// Nearest point on the surface (embedded) or reduction to the fundamental
  /// domain (chart).
  virtual Point project(const Vec3& x) const = 0;
  virtual Vec3 tangent_project(const Point& p, const Vec3& v) const = 0;
  double inner(const Point& /*base*/, const Vec3& u, const Vec3& v) const { return u.dot(v); }

  /// Displacement from p to a nearby q (minimal image on the torus).
  virtual Vec3 chord(const Point& p, const Point& q) const { return q - p; }
  /// Geodesic distance between nearby points.
  virtual double step_distance(const Point& p, const Point& q) const = 0;
  /// Midpoint of the short geodesic between nearby points.
  virtual Point midpoint(const Point& p, const Point& q) const = 0;
  Point retract(const Point& p, const Vec3& v) const { return project(p + v); }

  /// Second derivative of a unit-speed geodesic through x with velocity v.
  virtual Vec3 geodesic_acceleration(const Point& x, const Vec3& v) const = 0;

  /// Relative distance of p from the model's point set (0 on the surface).
  virtual double surface_residual(const Point& p) const = 0;

  virtual Point sample(std::mt19937_64& rng) const = 0;
  virtual Point antipode(const Point& p) const { return project(-p); }
  virtual std::optional<double> exact_diameter() const { return std::nullopt; }

  /// Largest span over which chord midpoints are trusted during relaxation.
  virtual double coarse_span_limit() const = 0;

  /// Chart straight line (embedded: projected chord) from p to q, or nullopt
  /// if the chord passes too close to a point where projection is singular.
  virtual std::optional<Polyline> direct_seed(const Point& p, const Point& q,
                                              double spacing) const;
  /// Fixed fan of alternative seeds from p to q; `phase` rotates the fan.
  virtual std::vector<Polyline> fan_seeds(const Point& p, const Point& q, int count,
                                          double phase, double spacing) const;

  /// Geodesic integration step (0.01 of the shortest shape parameter).
  double base_step() const { return 0.01 * min_shape_parameter(); }

  /// Orthonormal basis of the tangent plane at p, first vector along `hint`
  /// when hint has a tangential component.
  std::pair<Vec3, Vec3> tangent_basis(const Point& p, const Vec3& hint) const;
  virtual Vec3 unit_normal(const Point& p) const = 0;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

ManifoldPtr make_round_sphere(double radius);
ManifoldPtr make_ellipsoid(double a, double b, double c);
ManifoldPtr make_flat_torus(double period_x, double period_y);
ManifoldPtr make_torus_of_revolution(double major_radius, double minor_radius);
/// Build from a kind plus the named parameters of `shape_parameters()`.
ManifoldPtr make_manifold(ManifoldKind kind, const std::map<std::string, double>& params);

struct ShootResult {
  Point end;
  TangentVector velocity;  // transported tangent at `end`
  Polyline path;           // integration nodes, start and end included
};

/// Unit-speed geodesic from p along v for arclength t (4th-order fixed-step).
ShootResult geodesic_shoot(const Manifold& m, const Point& p, const Vec3& v, double t);

/// Locally minimizing geodesic from p to q by polyline relaxation, seeded by
/// `hint` when given, otherwise by the direct seed (or the first fan seed).
GeodesicSegment shortest_geodesic(const Manifold& m, const Point& p, const Point& q,
                                  const std::optional<Polyline>& hint = std::nullopt);

/// The shortest of the relaxations from the direct seed and a fixed fan.
GeodesicSegment minimal_geodesic(const Manifold& m, const Point& p, const Point& q);
double distance(const Manifold& m, const Point& p, const Point& q);

struct DiameterEstimate {
  double value = 0.0;               // lower estimate from sampled pairs
  std::optional<double> exact;      // closed form when known
};
DiameterEstimate diameter_estimate(const Manifold& m, int sample_count, std::uint64_t seed);

double angle_between(const Manifold& m, const TangentVector& u, const TangentVector& v);

/// Number of fan directions tried by `minimal_geodesic`.
inline constexpr int kDistanceFanSize = 8;

}  // namespace geonet
