#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "geonet/errors.hpp"
#include "geonet/serialize.hpp"

using namespace geonet;
namespace fs = std::filesystem;

namespace {

void check_same_net(const Net& a, const Net& b) {
  REQUIRE(a.vertices.size() == b.vertices.size());
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.vertices.size(); ++i) CHECK(a.vertices[i] == b.vertices[i]);
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    CHECK(a.edges[e].from == b.edges[e].from);
    CHECK(a.edges[e].to == b.edges[e].to);
    CHECK(a.edges[e].exponent == b.edges[e].exponent);
    CHECK(a.edges[e].order == b.edges[e].order);
    CHECK(a.edges[e].polyline == b.edges[e].polyline);
  }
}

fs::path scratch_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / ("geonet_test_" + std::string(name));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("manifold descriptors round-trip") {
  for (const auto& m : {make_round_sphere(2.5), make_ellipsoid(1.0, 0.9, 0.7), make_flat_torus(1.0, 1.3),
                        make_torus_of_revolution(2.0, 0.5)}) {
    const json j = manifold_to_json(*m);
    const auto back = manifold_from_json(json::parse(j.dump()));
    CHECK(back->kind() == m->kind());
    CHECK(back->shape_parameters() == m->shape_parameters());
  }
  CHECK_THROWS_AS(manifold_from_json(json{{"kind", "klein-bottle"}}), InvalidInput);
  CHECK_THROWS_AS(manifold_from_json(json{{"kind", "round-sphere"}, {"parameters", json::object()}}), InvalidInput);
}

TEST_CASE("nets round-trip bit for bit through text") {
  auto s = make_round_sphere(1.0);
  const Net cage = make_cage(s, Point(1, 0, 0), Point(-0.3, 0.9, 0.3).normalized(), 3, 11);
  const Net back = net_from_json(json::parse(net_to_json(cage).dump()));
  check_same_net(cage, back);
  CHECK(weighted_length(back, 3) == weighted_length(cage, 3));

  Net with_trivial = cage;
  with_trivial.edges[1].polyline.clear();
  with_trivial.edges[1].to = with_trivial.edges[1].from;
  check_same_net(with_trivial, net_from_json(json::parse(net_to_json(with_trivial).dump()), s));
}

TEST_CASE("net_from_json rejects inconsistent nets") {
  auto s = make_round_sphere(1.0);
  json j = net_to_json(make_latitude_loop(s, 0.0, 0.0, 0));
  j["edges"][0]["to"] = 5;
  CHECK_THROWS(net_from_json(j));
  json bad_point = net_to_json(make_latitude_loop(s, 0.0, 0.0, 0));
  bad_point["vertices"][0] = json::array({1.0, 0.0});
  CHECK_THROWS_AS(net_from_json(bad_point), InvalidInput);
}

TEST_CASE("flow parameters: overrides, unknown keys") {
  FlowParams d = FlowParams::defaults(3, 2, std::numbers::pi);
  const FlowParams p = flow_params_from_json(json{{"max_iterations", 10}, {"eta", 1e-4}}, d);
  CHECK(p.max_iterations == 10);
  CHECK(p.eta == 1e-4);
  CHECK(p.rho_v == d.rho_v);
  CHECK(flow_params_to_json(flow_params_from_json(flow_params_to_json(p))) == flow_params_to_json(p));
  CHECK_THROWS_AS(flow_params_from_json(json{{"step", 1.0}}), InvalidInput);
}

TEST_CASE("traces and checkpoints round-trip") {
  auto s = make_round_sphere(1.0);
  FlowParams p = FlowParams::defaults(3, 2, std::numbers::pi);
  p.record_every = 50;
  p.max_iterations = 120;
  FlowCheckpoint last;
  FlowOptions opts;
  opts.on_checkpoint = [&](const FlowCheckpoint& c) { last = c; };
  const FlowTrace t = run_flow(make_cage(s, {0, 0, 1}, {0.2, 0.1, -1}, 3, 2), p, opts);

  const FlowTrace back = trace_from_json(json::parse(trace_to_json(t).dump()));
  CHECK(back.status == t.status);
  CHECK(back.iterations == t.iterations);
  CHECK(back.lengths == t.lengths);
  CHECK(back.events == t.events);
  REQUIRE(back.snapshots.size() == t.snapshots.size());
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
    CHECK(back.snapshots[i].iteration == t.snapshots[i].iteration);
    CHECK(back.snapshots[i].weighted_length == t.snapshots[i].weighted_length);
    check_same_net(back.snapshots[i].net, t.snapshots[i].net);
  }
  CHECK(trace_to_json(back) == trace_to_json(t));

  REQUIRE(last.iteration > 0);
  const auto [cp, params] = checkpoint_from_json(json::parse(checkpoint_to_json(last, p).dump()));
  CHECK(cp.iteration == last.iteration);
  check_same_net(cp.current, last.current);
  CHECK(flow_params_to_json(params) == flow_params_to_json(p));
}

TEST_CASE("event encoding") {
  const FlowEvent collapse{EventKind::EdgeCollapsed, 7, 2, -1, -1};
  const FlowEvent merge{EventKind::VerticesMerged, 9, -1, 0, 1};
  CHECK(event_from_json(event_to_json(collapse)) == collapse);
  CHECK(event_from_json(event_to_json(merge)) == merge);
  CHECK(event_to_json(collapse)["kind"] == "edge-collapsed");
}

TEST_CASE("exact quantities keep every digit") {
  const bounds::BigInt big("549043018919064123456789");
  const json j = exact_quantity(big, "1");
  CHECK(j["exact"] == "549043018919064123456789");
  CHECK(j["unit"] == "1");
  CHECK(quantity(2.0, "rad")["unit"] == "rad");
}

TEST_CASE("write_atomic replaces the target and leaves no temporary") {
  const fs::path dir = scratch_dir("atomic");
  const fs::path f = dir / "nested" / "out.txt";
  write_atomic(f, "first");
  write_atomic(f, "second");
  CHECK(read_file(f) == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(f.parent_path())) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_WITH_AS(read_file(dir / "missing.txt"), doctest::Contains("missing.txt"), std::runtime_error);
  fs::remove_all(dir);
}
