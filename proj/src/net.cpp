#include "geonet/net.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "geonet/errors.hpp"
#include "geonet/polyline.hpp"

namespace geonet {

std::string to_string(NetClass c) {
  switch (c) {
    case NetClass::PointNet: return "point";
    case NetClass::PeriodicGeodesic: return "periodic-geodesic";
    case NetClass::Flower: return "flower";
    case NetClass::Cage: return "cage";
    case NetClass::General: return "general";
  }
  return "general";
}

NetClass net_class_from_string(std::string_view name) {
  if (name == "point") return NetClass::PointNet;
  if (name == "periodic-geodesic") return NetClass::PeriodicGeodesic;
  if (name == "flower") return NetClass::Flower;
  if (name == "cage") return NetClass::Cage;
  if (name == "general") return NetClass::General;
  throw InvalidInput("unknown net class '" + std::string(name) + "'");
}

void Net::validate() const {
  if (!manifold) throw InvalidState("net has no manifold");
  const int nv = static_cast<int>(vertices.size());
  std::vector<int> seen(edges.size(), 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const WeightedEdge& e = edges[i];
    std::ostringstream where;
    where << "edge " << i << ": ";
    if (e.from < 0 || e.from >= nv || e.to < 0 || e.to >= nv) {
      throw InvalidState(where.str() + "endpoint index out of range");
    }
    if (e.exponent < 0 || e.exponent >= static_cast<int>(edges.size())) {
      throw InvalidState(where.str() + "exponent outside 0..k-1");
    }
    if (seen[static_cast<std::size_t>(e.exponent)]++) {
      throw InvalidState(where.str() + "duplicate exponent");
    }
    if (e.order != e.exponent) throw InvalidState(where.str() + "order index differs from exponent");
    if (e.trivial()) continue;
    const Manifold& m = *manifold;
    const double tol = 1e-9 * m.min_shape_parameter();
    if (m.chord(e.polyline.front(), vertices[static_cast<std::size_t>(e.from)]).norm() > tol ||
        m.chord(e.polyline.back(), vertices[static_cast<std::size_t>(e.to)]).norm() > tol) {
      throw InvalidState(where.str() + "polyline endpoints do not match the vertices");
    }
  }
}

int Net::max_exponent() const {
  int out = -1;
  for (const auto& e : edges) out = std::max(out, e.exponent);
  return out;
}

double edge_length(const Manifold& m, const WeightedEdge& e) {
  return e.trivial() ? 0.0 : polyline_length(m, e.polyline);
}

double weighted_length(const Net& net, double a) {
  double sum = 0.0;
  for (const auto& e : net.edges) {
    if (e.trivial()) continue;
    sum += std::pow(a, e.exponent) * edge_length(*net.manifold, e);
  }
  return sum;
}

double weighted_length(const Net& net, int a) {
  if (a < 3) throw InvalidInput("weighted_length: a must be >= 3");
  return weighted_length(net, static_cast<double>(a));
}

double unweighted_length(const Net& net) { return weighted_length(net, 1.0); }

std::vector<Vec3> vertex_residuals(const Net& net, double a) {
  std::vector<Vec3> out(net.vertices.size(), Vec3::Zero());
  for (const auto& e : net.edges) {
    if (e.trivial()) continue;
    const double w = std::pow(a, e.exponent);
    out[static_cast<std::size_t>(e.from)] += w * front_tangent(*net.manifold, e.polyline);
    out[static_cast<std::size_t>(e.to)] += w * back_tangent(*net.manifold, e.polyline);
  }
  return out;
}

Net make_cage(const ManifoldPtr& m, const Point& p1, const Point& p2, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("make_cage: k must be >= 2");
  Net net;
  net.manifold = m;
  const Point a = m->project(p1);
  const Point b = m->project(p2);
  if (m->chord(a, b).norm() <= 1e-13 * m->min_shape_parameter()) {
    net.vertices = {a};
    for (int i = 0; i < k; ++i) net.edges.push_back({0, 0, {}, i, i});
    return net;
  }
  net.vertices = {a, b};

  std::mt19937_64 rng(seed);
  const double phase =
      std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi / k)(rng);
  std::vector<Polyline> hints;
  for (int count = k; static_cast<int>(hints.size()) < k && count <= 64 * k; count *= 2) {
    hints = m->fan_seeds(a, b, count, phase, m->base_step());
  }
  if (static_cast<int>(hints.size()) < k) {
    throw NumericalError("make_cage: could not build enough fan hints");
  }
  for (int i = 0; i < k; ++i) {
    GeodesicSegment seg = shortest_geodesic(*m, a, b, hints[static_cast<std::size_t>(i)]);
    net.edges.push_back({0, 1, std::move(seg.polyline), i, i});
  }
  return net;
}

std::vector<std::pair<int, int>> alphabetical_pairs(int vertex_count) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < vertex_count; ++i) {
    for (int j = i + 1; j < vertex_count; ++j) out.emplace_back(i, j);
  }
  return out;
}

Net make_skeleton_net(const ManifoldPtr& m, const std::vector<Point>& vertex_points) {
  if (vertex_points.size() < 3) throw InvalidInput("make_skeleton_net: need at least 3 points");
  Net net;
  net.manifold = m;
  for (const auto& p : vertex_points) net.vertices.push_back(m->project(p));
  const auto pairs = alphabetical_pairs(static_cast<int>(net.vertices.size()));
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [i, j] = pairs[e];
    const Point& p = net.vertices[static_cast<std::size_t>(i)];
    const Point& q = net.vertices[static_cast<std::size_t>(j)];
    Polyline poly;
    if (m->chord(p, q).norm() > 1e-13 * m->min_shape_parameter()) {
      poly = minimal_geodesic(*m, p, q).polyline;
    }
    const int x = static_cast<int>(e);
    net.edges.push_back({i, j, std::move(poly), x, x});
  }
  return net;
}

Net make_flower(const ManifoldPtr& m, const std::vector<Polyline>& petals) {
  if (petals.empty()) throw InvalidInput("make_flower: need at least one petal");
  Net net;
  net.manifold = m;
  const Point base = m->project(petals.front().front());
  net.vertices = {base};
  for (std::size_t i = 0; i < petals.size(); ++i) {
    Polyline poly = petals[i];
    const int x = static_cast<int>(i);
    if (poly.size() < 2 || polyline_length(*m, poly) == 0.0) {
      net.edges.push_back({0, 0, {}, x, x});
      continue;
    }
    const double tol = 1e-9 * m->min_shape_parameter();
    if (m->chord(poly.front(), base).norm() > tol || m->chord(poly.back(), base).norm() > tol) {
      throw InvalidInput("make_flower: every petal must start and end at the base point");
    }
    poly.front() = base;
    poly.back() = base;
    net.edges.push_back({0, 0, std::move(poly), x, x});
  }
  return net;
}

Net make_latitude_loop(const ManifoldPtr& m, double latitude, double longitude, int segments) {
  if (m->kind() == ManifoldKind::FlatTorus) {
    throw InvalidInput("make_latitude_loop needs an embedded model");
  }
  if (!(std::abs(latitude) < 0.5 * std::numbers::pi)) {
    throw InvalidInput("make_latitude_loop: |latitude| must be below pi/2");
  }
  double scale = 1.0;
  for (const auto& [name, value] : m->shape_parameters()) {
    if (name == "major_radius") scale = value;
  }
  const double circumference = 2.0 * std::numbers::pi * scale * std::cos(latitude);
  if (segments <= 0) {
    segments = std::max(8, static_cast<int>(std::ceil(circumference / m->base_step())));
  }
  Polyline loop;
  loop.reserve(static_cast<std::size_t>(segments) + 1);
  for (int i = 0; i <= segments; ++i) {
    const double lon = longitude + 2.0 * std::numbers::pi * (i % segments) / segments;
    const Vec3 dir(std::cos(latitude) * std::cos(lon), std::cos(latitude) * std::sin(lon),
                   std::sin(latitude));
    loop.push_back(m->project(scale * dir));
  }
  return make_flower(m, {loop});
}

}  // namespace geonet
