#pragma once

#include <cstdint>
#include <vector>

#include "geonet/manifold.hpp"

namespace geonet {

/// An edge carrying weight a^exponent. The polyline runs from vertex `from`
/// to vertex `to`; a trivial (collapsed) edge keeps its exponent but has an
/// empty polyline.
struct WeightedEdge {
  int from = 0;
  int to = 0;
  Polyline polyline;
  int exponent = 0;
  int order = 0;

  bool is_loop() const { return from == to; }
  bool trivial() const { return polyline.size() < 2; }
};

enum class NetClass { PointNet, PeriodicGeodesic, Flower, Cage, General };
std::string to_string(NetClass c);
NetClass net_class_from_string(std::string_view name);

/// A multigraph immersed in a manifold.
struct Net {
  ManifoldPtr manifold;
  std::vector<Point> vertices;
  std::vector<WeightedEdge> edges;

  /// Throws InvalidState when indices, endpoints or exponents are inconsistent.
  void validate() const;
  int max_exponent() const;
};

double edge_length(const Manifold& m, const WeightedEdge& e);

/// L_a = sum of a^exponent * length over the edges.
double weighted_length(const Net& net, int a);
/// Same sum for a real base (the flow works with a as a double).
double weighted_length(const Net& net, double a);
double unweighted_length(const Net& net);

/// Per vertex: sum over incident edge-ends of a^exponent times the unit
/// tangent pointing away from the vertex (first polyline segment). Loops
/// contribute both ends; trivial edges contribute nothing.
std::vector<Vec3> vertex_residuals(const Net& net, double a);

/// Two vertices joined by k geodesics relaxed from k fan hints, exponents
/// 0..k-1 in fan order. Coincident points give one vertex with k trivial
/// loops.
Net make_cage(const ManifoldPtr& m, const Point& p1, const Point& p2, int k, std::uint64_t seed);

/// Complete graph on the points with minimal geodesic edges; edge exponents
/// follow the alphabetical order of the pairs (i, j), i < j.
Net make_skeleton_net(const ManifoldPtr& m, const std::vector<Point>& vertex_points);

/// Exponent assignment for the complete graph on `vertex_count` vertices:
/// entry e is the pair carried by the edge with exponent e.
std::vector<std::pair<int, int>> alphabetical_pairs(int vertex_count);

/// One vertex at the first point of each closed polyline; petal i gets
/// exponent i.
Net make_flower(const ManifoldPtr& m, const std::vector<Polyline>& petals);

/// The circle at the given latitude (radians, measured from the xy-plane) on
/// an embedded model, as a single loop based at `longitude`.
Net make_latitude_loop(const ManifoldPtr& m, double latitude, double longitude, int segments);

}  // namespace geonet
