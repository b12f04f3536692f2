#include "geonet/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "geonet/errors.hpp"

namespace geonet {

namespace {

json point_to_json(const Point& p) { return json::array({p.x(), p.y(), p.z()}); }

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("expected a 3-element coordinate array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json manifold_to_json(const Manifold& m) {
  json params = json::object();
  for (const auto& [name, value] : m.shape_parameters()) params[name] = value;
  return {{"kind", to_string(m.kind())}, {"parameters", params}};
}

ManifoldPtr manifold_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("manifold descriptor must be an object");
  const auto kind = manifold_kind_from_string(required<std::string>(j, "kind"));
  std::map<std::string, double> params;
  if (j.contains("parameters")) {
    for (const auto& [name, value] : j.at("parameters").items()) {
      if (!value.is_number()) throw InvalidInput("manifold parameter '" + name + "' must be a number");
      params[name] = value.get<double>();
    }
  }
  return make_manifold(kind, params);
}

json net_to_json(const Net& net) {
  json out;
  out["format"] = kNetFormatVersion;
  out["units"] = {{"coordinates", "manifold"}};
  if (net.manifold) out["manifold"] = manifold_to_json(*net.manifold);
  json vs = json::array();
  for (const auto& v : net.vertices) vs.push_back(point_to_json(v));
  out["vertices"] = vs;
  json es = json::array();
  for (const auto& e : net.edges) {
    json pl = json::array();
    for (const auto& p : e.polyline) pl.push_back(point_to_json(p));
    es.push_back({{"from", e.from}, {"to", e.to}, {"exponent", e.exponent}, {"order", e.order}, {"polyline", pl}});
  }
  out["edges"] = es;
  return out;
}

Net net_from_json(const json& j, ManifoldPtr manifold) {
  if (!j.is_object()) throw InvalidInput("net must be an object");
  if (j.contains("format") && j.at("format").get<int>() != kNetFormatVersion) {
    throw InvalidInput("unsupported net format " + j.at("format").dump());
  }
  Net net;
  net.manifold = manifold ? std::move(manifold) : manifold_from_json(j.at("manifold"));
  for (const auto& v : required<json>(j, "vertices")) net.vertices.push_back(point_from_json(v));
  for (const auto& e : required<json>(j, "edges")) {
    WeightedEdge edge;
    edge.from = required<int>(e, "from");
    edge.to = required<int>(e, "to");
    edge.exponent = required<int>(e, "exponent");
    edge.order = e.value("order", edge.exponent);
    for (const auto& p : required<json>(e, "polyline")) edge.polyline.push_back(point_from_json(p));
    net.edges.push_back(std::move(edge));
  }
  net.validate();
  return net;
}

json flow_params_to_json(const FlowParams& p) {
  return {{"a", p.a},
          {"eta", p.eta},
          {"rho_e", p.rho_e},
          {"rho_v", p.rho_v},
          {"sigma", p.sigma},
          {"max_iterations", p.max_iterations},
          {"record_every", p.record_every},
          {"spacing", p.spacing},
          {"edge_tolerance", p.edge_tolerance}};
}

FlowParams flow_params_from_json(const json& j, FlowParams p) {
  if (!j.is_object()) throw InvalidInput("flow parameters must be an object");
  static const std::set<std::string> known = {"a",     "eta",           "rho_e",        "rho_v",   "sigma",
                                              "max_iterations", "record_every", "spacing", "edge_tolerance"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InvalidInput("unknown flow parameter '" + key + "'");
  }
  p.a = j.value("a", p.a);
  p.eta = j.value("eta", p.eta);
  p.rho_e = j.value("rho_e", p.rho_e);
  p.rho_v = j.value("rho_v", p.rho_v);
  p.sigma = j.value("sigma", p.sigma);
  p.max_iterations = j.value("max_iterations", p.max_iterations);
  p.record_every = j.value("record_every", p.record_every);
  p.spacing = j.value("spacing", p.spacing);
  p.edge_tolerance = j.value("edge_tolerance", p.edge_tolerance);
  return p;
}

json event_to_json(const FlowEvent& e) {
  json out = {{"kind", to_string(e.kind)}, {"iteration", e.iteration}};
  if (e.kind == EventKind::EdgeCollapsed) {
    out["edge"] = e.edge;
  } else {
    out["vertex_kept"] = e.vertex_kept;
    out["vertex_removed"] = e.vertex_removed;
  }
  return out;
}

FlowEvent event_from_json(const json& j) {
  FlowEvent e;
  e.kind = event_kind_from_string(required<std::string>(j, "kind"));
  e.iteration = required<long>(j, "iteration");
  e.edge = j.value("edge", -1);
  e.vertex_kept = j.value("vertex_kept", -1);
  e.vertex_removed = j.value("vertex_removed", -1);
  return e;
}

json trace_to_json(const FlowTrace& t) {
  json out;
  out["status"] = to_string(t.status);
  out["iterations"] = t.iterations;
  if (!t.error.empty()) out["error"] = t.error;
  json lengths = json::array();
  for (const auto& [it, l] : t.lengths) lengths.push_back(json::array({it, l}));
  out["lengths"] = lengths;
  json events = json::array();
  for (const auto& e : t.events) events.push_back(event_to_json(e));
  out["events"] = events;
  out["monotonicity_violations"] = t.monotonicity_violations;
  json snaps = json::array();
  for (const auto& s : t.snapshots) {
    snaps.push_back({{"iteration", s.iteration},
                     {"weighted_length", s.weighted_length},
                     {"max_residual", s.max_residual},
                     {"net", net_to_json(s.net)}});
  }
  out["snapshots"] = snaps;
  return out;
}

FlowTrace trace_from_json(const json& j) {
  FlowTrace t;
  t.status = terminal_status_from_string(required<std::string>(j, "status"));
  t.iterations = required<long>(j, "iterations");
  t.error = j.value("error", std::string());
  for (const auto& l : required<json>(j, "lengths")) t.lengths.emplace_back(l.at(0).get<long>(), l.at(1).get<double>());
  for (const auto& e : required<json>(j, "events")) t.events.push_back(event_from_json(e));
  t.monotonicity_violations = j.value("monotonicity_violations", std::vector<long>{});
  ManifoldPtr shared;
  for (const auto& s : required<json>(j, "snapshots")) {
    Snapshot snap;
    snap.iteration = required<long>(s, "iteration");
    snap.weighted_length = required<double>(s, "weighted_length");
    snap.max_residual = required<double>(s, "max_residual");
    snap.net = net_from_json(s.at("net"), shared);
    shared = snap.net.manifold;
    t.snapshots.push_back(std::move(snap));
  }
  return t;
}

json checkpoint_to_json(const FlowCheckpoint& c, const FlowParams& p) {
  return {{"format", kNetFormatVersion},
          {"iteration", c.iteration},
          {"params", flow_params_to_json(p)},
          {"current", net_to_json(c.current)},
          {"trace", trace_to_json(c.trace)}};
}

std::pair<FlowCheckpoint, FlowParams> checkpoint_from_json(const json& j) {
  FlowCheckpoint c;
  c.iteration = required<long>(j, "iteration");
  c.current = net_from_json(j.at("current"));
  c.trace = trace_from_json(j.at("trace"));
  return {std::move(c), flow_params_from_json(j.at("params"))};
}

json quantity(double value, const char* unit) { return {{"value", value}, {"unit", unit}}; }

json exact_quantity(const bounds::BigInt& value, const char* unit) {
  return {{"exact", value.str()}, {"value", static_cast<double>(value)}, {"unit", unit}};
}

json stationarity_to_json(const StationarityReport& r) {
  json out;
  out["class"] = to_string(r.net_class);
  json norms = json::array();
  for (double n : r.residual_norms) norms.push_back(n);
  out["residual_norms"] = {{"value", norms}, {"unit", "weighted"}};
  out["max_residual"] = quantity(r.max_residual, "weighted");
  out["sigma"] = quantity(r.sigma, "weighted");
  json petals = json::array();
  for (const auto& p : r.petals) {
    petals.push_back({{"edge", p.edge},
                      {"exponent", p.exponent},
                      {"length", quantity(p.length, "length")},
                      {"angle", quantity(p.angle, "rad")}});
  }
  out["petals"] = petals;
  if (r.verdict) {
    const auto& v = *r.verdict;
    out["wide_loop"] = {{"petal", v.petal},
                        {"exponent", v.exponent},
                        {"angle", quantity(v.angle, "rad")},
                        {"angle_defect", quantity(v.angle_defect, "rad")},
                        {"lhs", quantity(v.lhs, "1")},
                        {"bound", quantity(v.bound, "1")},
                        {"slack", quantity(v.slack, "1")},
                        {"epsilon", quantity(v.epsilon, "rad")},
                        {"within_epsilon", v.within_epsilon},
                        {"bound_below_epsilon", v.bound_below_epsilon},
                        {"passed", v.passed}};
  }
  return out;
}

json oracle_to_json(const oracle::OracleResult& r, bool with_argmin) {
  json out = {{"minimized", quantity(r.minimized, "weighted")},
              {"predicted", quantity(r.predicted, "weighted")},
              {"gap", quantity(r.gap(), "weighted")},
              {"restarts", r.restarts},
              {"converged_restarts", r.converged_restarts},
              {"sweeps", r.sweeps},
              {"best_restart", r.best_restart},
              {"converged", r.converged}};
  if (with_argmin) {
    json vs = json::array();
    for (const auto& v : r.argmin.vectors) vs.push_back(vec_to_json(v));
    out["argmin"] = {{"dimension", r.argmin.dimension},
                     {"fixed", vec_to_json(r.argmin.fixed)},
                     {"weights", r.argmin.weights},
                     {"vectors", vs}};
  }
  return out;
}

namespace {

json vertex_check_to_json(const oracle::VertexCheck& c) {
  return {{"vertices", c.vertices},
          {"exponents", c.exponents},
          {"margin", {{"exact", c.margin}, {"unit", "weighted"}}},
          {"dominant", c.dominant},
          {"oracle", oracle_to_json(c.oracle, false)}};
}

json scaled_to_json(const bounds::ScaledBound& b) {
  return {{"factor", exact_quantity(b.factor)}, {"scale", quantity(b.scale, "length")},
          {"value", quantity(b.value, "length")}};
}

}  // namespace

json merging_to_json(const oracle::MergingReport& r) {
  json out = {{"vertex_count", r.vertex_count},
              {"a", r.a},
              {"edge_pairs", r.edge_pairs},
              {"partitions_checked", r.partitions_checked},
              {"partitions_dominant", r.partitions_dominant},
              {"all_dominant", r.all_dominant}};
  out["vertices"] = json::array();
  for (const auto& c : r.vertices) out["vertices"].push_back(vertex_check_to_json(c));
  out["merged_examples"] = json::array();
  for (const auto& c : r.merged_examples) out["merged_examples"].push_back(vertex_check_to_json(c));
  return out;
}

json bounds_to_json(const bounds::BoundReport& r) {
  json out;
  out["a"] = r.a;
  out["diameter_bound"] = scaled_to_json(r.diameter);
  out["recurrence"] = json::array();
  for (const auto& s : r.recurrence) out["recurrence"].push_back({{"k", s.k}, {"bound", scaled_to_json(s.bound)}});
  if (r.fillrad) {
    const auto& f = *r.fillrad;
    out["fillrad"] = {{"katz", quantity(f.katz, "length")},
                      {"gromov", quantity(f.gromov, "length")},
                      {"wenger", quantity(f.wenger, "length")},
                      {"nabutovsky", quantity(f.nabutovsky, "length")},
                      {"gromov_constant", quantity(f.gromov_constant, "1")},
                      {"wenger_constant", exact_quantity(f.wenger_constant)},
                      {"nabutovsky_constant", f.nabutovsky_constant}};
  }
  if (r.volume) {
    const auto& v = *r.volume;
    out["volume_length"] = {{"fillrad_factor", exact_quantity(v.fillrad_factor)},
                            {"volume_factor", exact_quantity(v.volume_factor)},
                            {"stated_volume_factor", exact_quantity(v.stated_volume_factor)},
                            {"unsimplified_factor", {{"exact", v.unsimplified_factor}, {"unit", "1"}}},
                            {"via_volume", quantity(v.via_volume, "length")}};
    if (v.via_fillrad) out["volume_length"]["via_fillrad"] = quantity(*v.via_fillrad, "length");
  }
  out["petal_count"] = {{"edges", r.petals.edges},
                        {"sum", exact_quantity(r.petals.sum, "petals")},
                        {"cap", exact_quantity(r.petals.cap, "petals")}};
  return out;
}

json compliance_to_json(const bounds::Compliance& c) {
  json out = {{"critical_point_found", c.critical_point_found},
              {"note", c.note},
              {"envelope_max", quantity(c.envelope_max, "length")}};
  if (c.petal_length) out["petal_length"] = quantity(*c.petal_length, "length");
  out["checks"] = json::array();
  for (const auto& b : c.checks) {
    out["checks"].push_back({{"name", b.name},
                             {"bound", quantity(b.bound, "length")},
                             {"found", quantity(b.found, "length")},
                             {"margin", quantity(b.margin, "1")},
                             {"passed", b.passed}});
  }
  const auto p = c.passed();
  out["passed"] = p ? json(*p) : json(nullptr);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace geonet
