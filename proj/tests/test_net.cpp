#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "geonet/errors.hpp"
#include "geonet/net.hpp"
#include "geonet/polyline.hpp"

using namespace geonet;
using std::numbers::pi;

namespace {

// Straight chart polyline on a flat torus large enough that nothing wraps.
Polyline chart_segment(const Point& p, const Point& q, int segments) {
  Polyline out;
  for (int i = 0; i <= segments; ++i) out.push_back(p + (q - p) * (static_cast<double>(i) / segments));
  return out;
}

Net flat_net(const std::vector<double>& lengths) {
  Net net;
  net.manifold = make_flat_torus(50.0, 50.0);
  net.vertices = {{1, 1, 0}};
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const int x = static_cast<int>(i);
    net.vertices.push_back({1.0 + lengths[i], 1.0 + 2.0 * (x + 1), 0.0});
    Point start{1.0, 1.0 + 2.0 * (x + 1), 0.0};
    net.vertices.push_back(start);
    const int a = static_cast<int>(net.vertices.size()) - 1;
    if (lengths[i] > 0.0) {
      net.edges.push_back({a, a - 1, chart_segment(start, net.vertices[a - 1], 10), x, x});
    } else {
      net.edges.push_back({a, a, {}, x, x});
    }
  }
  return net;
}

}  // namespace

TEST_CASE("weighted_length: direct sums") {
  CHECK(weighted_length(flat_net({2.0}), 3) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(weighted_length(flat_net({1.0, 1.0, 1.0}), 3) == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(weighted_length(flat_net({0.0, 0.0, 0.0}), 3) == 0.0);
  CHECK(weighted_length(flat_net({1.0, 2.0, 0.5}), 4) == doctest::Approx(1.0 + 8.0 + 8.0).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_length(flat_net({1.0}), 2), InvalidInput);
}

TEST_CASE("weighted_length dominates the unweighted length") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> len(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> ls(1 + trial % 5);
    for (auto& l : ls) l = trial % 7 == 0 ? 0.0 : len(rng);
    const Net net = flat_net(ls);
    const double w = weighted_length(net, 3);
    const double u = unweighted_length(net);
    CHECK(w >= u - 1e-12);
    bool only_base = true;
    for (std::size_t i = 1; i < ls.size(); ++i) only_base = only_base && ls[i] == 0.0;
    if (only_base) CHECK(w == doctest::Approx(u).epsilon(1e-14));
    else CHECK(w > u);
  }
}

TEST_CASE("make_cage: antipodal sphere fan") {
  auto s = make_round_sphere(1.0);
  const Net net = make_cage(s, {1, 0, 0}, {-1, 0, 0}, 3, 42);
  REQUIRE(net.vertices.size() == 2);
  REQUIRE(net.edges.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto& e = net.edges[static_cast<std::size_t>(i)];
    CHECK(e.exponent == i);
    CHECK(e.order == i);
    CHECK(e.from == 0);
    CHECK(e.to == 1);
    CHECK(edge_length(*s, e) == doctest::Approx(pi).epsilon(1e-6));
  }
  // Distinct meridians: their initial directions differ.
  const Vec3 t0 = front_tangent(*s, net.edges[0].polyline);
  const Vec3 t1 = front_tangent(*s, net.edges[1].polyline);
  const Vec3 t2 = front_tangent(*s, net.edges[2].polyline);
  CHECK((t0 - t1).norm() > 0.1);
  CHECK((t1 - t2).norm() > 0.1);
  CHECK((t0 - t2).norm() > 0.1);
  CHECK(weighted_length(net, 3) == doctest::Approx(13.0 * pi).epsilon(1e-4));
  CHECK(weighted_length(make_cage(s, {1, 0, 0}, {-1, 0, 0}, 4, 5), 5) ==
        doctest::Approx(156.0 * pi).epsilon(1e-4));
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("make_cage: coincident points give trivial petals") {
  auto s = make_round_sphere(1.0);
  const Net net = make_cage(s, {0, 0, 1}, {0, 0, 1}, 2, 1);
  REQUIRE(net.vertices.size() == 1);
  REQUIRE(net.edges.size() == 2);
  for (const auto& e : net.edges) {
    CHECK(e.is_loop());
    CHECK(e.trivial());
  }
  CHECK(weighted_length(net, 3) == 0.0);
  CHECK_THROWS_AS(make_cage(s, {0, 0, 1}, {1, 0, 0}, 1, 1), InvalidInput);
}

TEST_CASE("make_cage: ellipsoid cage against the diameter") {
  auto e = make_ellipsoid(1.0, 1.0, 0.8);
  const double d = diameter_estimate(*e, 200, 3).value;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const Point p = e->sample(rng);
    const Point q = e->sample(rng);
    const Net net = make_cage(e, p, q, 3, static_cast<std::uint64_t>(trial));
    CHECK_NOTHROW(net.validate());
    CHECK(weighted_length(net, 3) <= 13.0 * d * (1.0 + 1e-3));
  }
}

TEST_CASE("make_cage is deterministic") {
  auto e = make_ellipsoid(1.0, 1.0, 0.8);
  const Net a = make_cage(e, {1, 0, 0}, {-0.6, 0.8, 0}, 3, 17);
  const Net b = make_cage(e, {1, 0, 0}, {-0.6, 0.8, 0}, 3, 17);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].exponent == b.edges[i].exponent);
    CHECK(a.edges[i].polyline == b.edges[i].polyline);
  }
}

TEST_CASE("make_skeleton_net: complete graph in alphabetical order") {
  auto s = make_round_sphere(1.0);
  const std::vector<Point> pts = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, Point(1, 1, 0).normalized()};
  const Net net = make_skeleton_net(s, pts);
  REQUIRE(net.edges.size() == 6);
  const auto pairs = alphabetical_pairs(4);
  const std::vector<std::pair<int, int>> expected = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(pairs == expected);
  for (std::size_t e = 0; e < 6; ++e) {
    CHECK(net.edges[e].exponent == static_cast<int>(e));
    CHECK(net.edges[e].from == expected[e].first);
    CHECK(net.edges[e].to == expected[e].second);
  }
  CHECK(edge_length(*s, net.edges[0]) == doctest::Approx(pi / 2).epsilon(1e-6));
  CHECK(edge_length(*s, net.edges[2]) == doctest::Approx(pi / 4).epsilon(1e-6));
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("make_skeleton_net: collinear chart points") {
  auto t = make_flat_torus(1.0, 1.0);
  const Net net = make_skeleton_net(t, {{0.1, 0.1, 0}, {0.2, 0.2, 0}, {0.35, 0.35, 0}});
  REQUIRE(net.edges.size() == 3);
  const double l01 = edge_length(*t, net.edges[0]);
  const double l02 = edge_length(*t, net.edges[1]);
  const double l12 = edge_length(*t, net.edges[2]);
  CHECK(l01 == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(l12 == doctest::Approx(0.15 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(l02 == doctest::Approx(l01 + l12).epsilon(1e-9));
}

TEST_CASE("make_skeleton_net: coincident points") {
  auto s = make_round_sphere(1.0);
  const Net net = make_skeleton_net(s, {{0, 1, 0}, {0, 1, 0}, {0, 1, 0}, {0, 1, 0}});
  CHECK(net.edges.size() == 6);
  for (const auto& e : net.edges) CHECK(e.trivial());
  CHECK(weighted_length(net, 3) == 0.0);
  CHECK_THROWS_AS(make_skeleton_net(s, {{0, 1, 0}, {1, 0, 0}}), InvalidInput);
}

TEST_CASE("Net::validate rejects inconsistent nets") {
  Net net = flat_net({1.0, 1.0});
  CHECK_NOTHROW(net.validate());
  Net bad = net;
  bad.edges[1].exponent = 0;
  bad.edges[1].order = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = net;
  bad.edges[0].order = 1;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = net;
  bad.edges[0].to = 9;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = net;
  bad.vertices[0] += Vec3(0.5, 0, 0);
  bad.vertices[1] += Vec3(0.5, 0, 0);
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = net;
  bad.manifold.reset();
  CHECK_THROWS_AS(bad.validate(), InvalidState);
}

TEST_CASE("vertex_residuals: great circle and open segment") {
  auto s = make_round_sphere(1.0);
  const Net loop = make_latitude_loop(s, 0.0, 0.3, 720);
  const auto r = vertex_residuals(loop, 3.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0].norm() < 1e-6);

  const Net net = flat_net({1.0, 2.0});
  const auto rs = vertex_residuals(net, 3.0);
  // Edge 1 (weight 3) starts at vertex 4 heading +x and ends at vertex 3.
  CHECK((rs[4] - Vec3(3, 0, 0)).norm() < 1e-12);
  CHECK((rs[3] - Vec3(-3, 0, 0)).norm() < 1e-12);
  CHECK(rs[0].norm() == 0.0);
}

TEST_CASE("net class names") {
  for (auto c : {NetClass::PointNet, NetClass::PeriodicGeodesic, NetClass::Flower, NetClass::Cage,
                 NetClass::General}) {
    CHECK(net_class_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(net_class_from_string("tree"), InvalidInput);
}
