#include "geonet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <thread>

#include "geonet/analysis.hpp"
#include "geonet/errors.hpp"

namespace geonet {

namespace fs = std::filesystem;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CageFlow: return "cage-flow";
    case ExperimentKind::SkeletonFlow: return "skeleton-flow";
    case ExperimentKind::Oracle: return "oracle";
    case ExperimentKind::Bounds: return "bounds";
    case ExperimentKind::Sweep: return "sweep";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "cage-flow") return ExperimentKind::CageFlow;
  if (name == "skeleton-flow") return ExperimentKind::SkeletonFlow;
  if (name == "oracle") return ExperimentKind::Oracle;
  if (name == "bounds") return ExperimentKind::Bounds;
  if (name == "sweep") return ExperimentKind::Sweep;
  throw InvalidInput("unknown experiment kind '" + std::string(name) + "'");
}

std::string to_string(OracleMode m) {
  switch (m) {
    case OracleMode::Cage: return "cage";
    case OracleMode::Flower: return "flower";
    case OracleMode::Merging: return "merging";
  }
  return "unknown";
}

OracleMode oracle_mode_from_string(std::string_view name) {
  if (name == "cage") return OracleMode::Cage;
  if (name == "flower") return OracleMode::Flower;
  if (name == "merging") return OracleMode::Merging;
  throw InvalidInput("unknown oracle mode '" + std::string(name) + "'");
}

int EpsilonInput::a() const { return exact ? bounds::a_of_epsilon(*exact) : bounds::a_of_epsilon(radians); }

json EpsilonInput::to_json() const {
  if (!exact) return radians;
  return {{"pi_fraction", {exact->numerator, exact->denominator}}, {"radians", radians}};
}

EpsilonInput EpsilonInput::from_json(const json& j) {
  EpsilonInput e;
  if (j.is_number()) {
    e.radians = j.get<double>();
  } else if (j.is_object() && j.contains("pi_fraction")) {
    const auto& f = j.at("pi_fraction");
    if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer()) {
      throw InvalidInput("pi_fraction must be [numerator, denominator]");
    }
    e.exact = bounds::PiFraction{f[0].get<long>(), f[1].get<long>()};
    if (e.exact->denominator <= 0) throw InvalidInput("pi_fraction denominator must be positive");
    e.radians = e.exact->radians();
  } else {
    throw InvalidInput("epsilon must be a number (radians) or {\"pi_fraction\": [p, q]}");
  }
  if (!(e.radians > 0.0 && e.radians < std::numbers::pi)) throw InvalidInput("epsilon must lie in (0, pi)");
  return e;
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < repeat; ++i) out.push_back(base_seed + static_cast<std::uint64_t>(i));
  return out;
}

int ExperimentConfig::resolved_a() const {
  if (a) return *a;
  if (epsilon) return epsilon->a();
  throw InvalidInput("config gives neither a nor epsilon");
}

double ExperimentConfig::resolved_epsilon() const {
  if (epsilon) return epsilon->radians;
  return 2.0 * std::asin(1.0 / (resolved_a() - 1));
}

namespace {

class Problems {
 public:
  void add(std::string p) { list_.push_back(std::move(p)); }
  bool empty() const { return list_.empty(); }

  template <class F>
  void guard(const std::string& context, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(context + ": " + e.what());
    }
  }

  [[noreturn]] void raise() const {
    std::string msg = "invalid config:";
    for (const auto& p : list_) msg += "\n  - " + p;
    throw InvalidInput(msg);
  }

 private:
  std::vector<std::string> list_;
};

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where, Problems& problems) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) problems.add("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, Problems& problems, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    problems.add(where + key + " has the wrong type (" + j.at(key).dump() + ")");
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out, Problems& problems, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T value{};
  read(j, key, value, problems, where);
  out = value;
}

bool is_flow_kind(ExperimentKind k) {
  return k == ExperimentKind::CageFlow || k == ExperimentKind::SkeletonFlow || k == ExperimentKind::Sweep;
}

int default_q(ManifoldKind kind) {
  return (kind == ManifoldKind::FlatTorus || kind == ManifoldKind::TorusOfRevolution) ? 1 : 2;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  Problems problems;
  ExperimentConfig c;
  check_keys(j,
             {"kind", "manifold", "seed", "repeat", "seeds", "k", "vertex_count", "initialization", "a", "epsilon",
              "epsilon_pi_fraction", "epsilons", "flow", "checkpoints", "bounds", "oracle", "workers",
              "output_dir", "resume"},
             "config", problems);

  if (!j.contains("kind")) {
    problems.add("missing 'kind'");
  } else {
    problems.guard("kind", [&] { c.kind = experiment_kind_from_string(j.at("kind").get<std::string>()); });
  }

  if (j.contains("manifold")) c.manifold = j.at("manifold");
  ManifoldPtr manifold;
  problems.guard("manifold", [&] { manifold = manifold_from_json(c.manifold); });

  read(j, "seed", c.base_seed, problems, "");
  read(j, "repeat", c.repeat, problems, "");
  read(j, "seeds", c.seeds, problems, "");
  if (c.repeat < 1) problems.add("repeat must be >= 1");
  if (j.contains("seeds") && c.seeds.empty()) problems.add("seeds must not be empty");

  read(j, "k", c.k, problems, "");
  read(j, "vertex_count", c.vertex_count, problems, "");
  read(j, "initialization", c.initialization, problems, "");
  if (c.initialization != "antipodal" && c.initialization != "random") {
    problems.add("initialization must be 'antipodal' or 'random'");
  }

  read(j, "a", c.a, problems, "");
  if (j.contains("epsilon") && j.contains("epsilon_pi_fraction")) {
    problems.add("give epsilon or epsilon_pi_fraction, not both");
  }
  if (j.contains("epsilon")) problems.guard("epsilon", [&] { c.epsilon = EpsilonInput::from_json(j.at("epsilon")); });
  if (j.contains("epsilon_pi_fraction")) {
    problems.guard("epsilon_pi_fraction", [&] {
      c.epsilon = EpsilonInput::from_json(json{{"pi_fraction", j.at("epsilon_pi_fraction")}});
    });
  }
  if (j.contains("epsilons")) {
    if (!j.at("epsilons").is_array()) {
      problems.add("epsilons must be an array");
    } else {
      int i = 0;
      for (const auto& e : j.at("epsilons")) {
        problems.guard("epsilons[" + std::to_string(i++) + "]", [&] { c.epsilons.push_back(EpsilonInput::from_json(e)); });
      }
    }
  }

  if (j.contains("flow")) {
    c.flow = j.at("flow");
    problems.guard("flow", [&] { flow_params_from_json(c.flow); });
  }
  read(j, "checkpoints", c.checkpoints, problems, "");

  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    if (!b.is_object()) {
      problems.add("bounds must be an object");
    } else {
      check_keys(b, {"n", "q", "diameter", "volume", "fillrad", "diameter_samples"}, "bounds", problems);
      read(b, "n", c.n, problems, "bounds.");
      read(b, "q", c.q, problems, "bounds.");
      read(b, "diameter", c.diameter, problems, "bounds.");
      read(b, "volume", c.volume, problems, "bounds.");
      read(b, "fillrad", c.fillrad, problems, "bounds.");
      read(b, "diameter_samples", c.diameter_samples, problems, "bounds.");
    }
  }
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    if (!o.is_object()) {
      problems.add("oracle must be an object");
    } else {
      check_keys(o, {"mode", "dimension", "restarts", "s", "theta"}, "oracle", problems);
      if (o.contains("mode")) {
        problems.guard("oracle.mode", [&] { c.oracle_mode = oracle_mode_from_string(o.at("mode").get<std::string>()); });
      }
      read(o, "dimension", c.dimension, problems, "oracle.");
      read(o, "restarts", c.restarts, problems, "oracle.");
      read(o, "s", c.s, problems, "oracle.");
      read(o, "theta", c.theta, problems, "oracle.");
    }
  }
  read(j, "workers", c.workers, problems, "");
  read(j, "output_dir", c.output_dir, problems, "");
  read(j, "resume", c.resume, problems, "");

  // Ranges.
  if (c.workers < 1) problems.add("workers must be >= 1");
  if (c.resume && c.output_dir.empty()) problems.add("resume needs output_dir");
  if (c.n < 1) problems.add("bounds.n must be >= 1");
  if (c.q && (*c.q < 1 || *c.q > c.n)) problems.add("bounds.q must lie in [1, n]");
  if (c.diameter && !(*c.diameter > 0.0)) problems.add("bounds.diameter must be positive");
  if (c.volume && !(*c.volume > 0.0)) problems.add("bounds.volume must be positive");
  if (c.fillrad && !(*c.fillrad > 0.0)) problems.add("bounds.fillrad must be positive");
  if (c.diameter_samples < 2) problems.add("bounds.diameter_samples must be >= 2");

  const bool oracle_kind = c.kind == ExperimentKind::Oracle;
  const int min_a = oracle_kind ? 2 : 3;
  if (c.a && *c.a < min_a) problems.add("a must be >= " + std::to_string(min_a));
  if (c.a && c.epsilon) {
    problems.guard("epsilon", [&] {
      if (c.epsilon->a() != *c.a) {
        problems.add("a = " + std::to_string(*c.a) + " disagrees with epsilon, which gives a = " +
                     std::to_string(c.epsilon->a()));
      }
    });
  }
  if (c.kind == ExperimentKind::Sweep) {
    if (c.epsilons.empty()) problems.add("sweep needs a non-empty epsilons list");
  } else if (!c.a && !c.epsilon) {
    problems.add("give a or epsilon");
  }

  if (is_flow_kind(c.kind)) {
    if (c.kind != ExperimentKind::SkeletonFlow && (c.k < 2 || c.k > 12)) problems.add("k must lie in [2, 12]");
    if (c.kind == ExperimentKind::SkeletonFlow && (c.vertex_count < 2 || c.vertex_count > 5)) {
      problems.add("vertex_count must lie in [2, 5] for skeleton-flow");
    }
  }
  if (oracle_kind) {
    if (c.dimension < 2) problems.add("oracle.dimension must be >= 2");
    if (c.restarts < 0) problems.add("oracle.restarts must be >= 0");
    if (c.oracle_mode == OracleMode::Cage && (c.k < 1 || c.k > 30)) problems.add("k must lie in [1, 30]");
    if (c.oracle_mode == OracleMode::Flower) {
      if (c.s < 1 || c.s > 30) problems.add("oracle.s must lie in [1, 30]");
      if (!(c.theta >= 0.0 && c.theta <= std::numbers::pi)) problems.add("oracle.theta must lie in [0, pi]");
    }
    if (c.oracle_mode == OracleMode::Merging && (c.vertex_count < 2 || c.vertex_count > 8)) {
      problems.add("vertex_count must lie in [2, 8] for the merging check");
    }
  }

  if (!problems.empty()) problems.raise();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["manifold"] = manifold_to_json(*manifold_from_json(c.manifold));
  j["seeds"] = c.seed_list();
  j["k"] = c.k;
  j["vertex_count"] = c.vertex_count;
  j["initialization"] = c.initialization;
  if (c.a) j["a"] = *c.a;
  if (c.epsilon) j["epsilon"] = c.epsilon->to_json();
  if (!c.epsilons.empty()) {
    j["epsilons"] = json::array();
    for (const auto& e : c.epsilons) j["epsilons"].push_back(e.to_json());
  }
  j["flow"] = c.flow;
  j["checkpoints"] = c.checkpoints;
  json b = {{"n", c.n}, {"diameter_samples", c.diameter_samples}};
  if (c.q) b["q"] = *c.q;
  if (c.diameter) b["diameter"] = *c.diameter;
  if (c.volume) b["volume"] = *c.volume;
  if (c.fillrad) b["fillrad"] = *c.fillrad;
  j["bounds"] = b;
  j["oracle"] = {{"mode", to_string(c.oracle_mode)},
                 {"dimension", c.dimension},
                 {"restarts", c.restarts},
                 {"s", c.s},
                 {"theta", c.theta}};
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir;
  j["resume"] = c.resume;
  return j;
}

std::optional<double> closed_form_area(const Manifold& m) {
  const auto params = m.shape_parameters();
  switch (m.kind()) {
    case ManifoldKind::RoundSphere: return 4.0 * std::numbers::pi * params[0].second * params[0].second;
    case ManifoldKind::FlatTorus: return params[0].second * params[1].second;
    case ManifoldKind::TorusOfRevolution:
      return 4.0 * std::numbers::pi * std::numbers::pi * params[0].second * params[1].second;
    case ManifoldKind::Ellipsoid: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Report document

bool ReportDocument::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok(); });
}

json ReportDocument::numeric_payload() const {
  json j = to_json();
  j.erase("timings");
  return j;
}

json ReportDocument::to_json() const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["artifact"] = {{"name", "geonet"}, {"version", kArtifactVersion}};
  j["config"] = config;
  j["setup"] = setup;
  int completed = 0, ok = 0;
  json rs = json::array();
  for (const auto& r : runs) {
    completed += r.completed;
    ok += r.ok();
    json rj = {{"index", r.index},     {"kind", r.kind},     {"seed", r.seed},
               {"completed", r.completed}, {"ok", r.ok()}, {"violations", r.violations},
               {"result", r.result}};
    if (!r.error.empty()) rj["error"] = r.error;
    rs.push_back(std::move(rj));
  }
  j["summary"] = {{"runs", runs.size()}, {"completed", completed}, {"ok", ok}, {"all_ok", all_ok()}};
  j["runs"] = rs;
  json per_run = json::array();
  for (const auto& r : runs) per_run.push_back(quantity(r.seconds, "s"));
  j["timings"] = {{"total", quantity(total_seconds, "s")}, {"runs", per_run}};
  return j;
}

ReportDocument ReportDocument::from_json(const json& j) {
  if (!j.is_object() || j.value("schema_version", 0) != kReportSchemaVersion) {
    throw InvalidInput("not a report document of schema version " + std::to_string(kReportSchemaVersion));
  }
  ReportDocument d;
  d.config = j.at("config");
  d.setup = j.at("setup");
  const json& timings = j.at("timings");
  d.total_seconds = timings.at("total").at("value").get<double>();
  std::size_t i = 0;
  for (const auto& rj : j.at("runs")) {
    RunRecord r;
    r.index = rj.at("index").get<int>();
    r.kind = rj.at("kind").get<std::string>();
    r.seed = rj.at("seed").get<std::uint64_t>();
    r.completed = rj.at("completed").get<bool>();
    r.error = rj.value("error", std::string());
    r.result = rj.at("result");
    r.violations = rj.at("violations").get<std::vector<std::string>>();
    r.seconds = timings.at("runs").at(i++).at("value").get<double>();
    d.runs.push_back(std::move(r));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Geometry export

namespace {

void append_number(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

void append_point_row(std::string& out, std::size_t snap, std::size_t edge, std::size_t point, const Point& p) {
  out += std::to_string(snap) + ',' + std::to_string(edge) + ',' + std::to_string(point);
  for (int c = 0; c < 3; ++c) {
    out += ',';
    append_number(out, p[c]);
  }
  out += '\n';
}

}  // namespace

void export_geometry(const FlowTrace& trace, const fs::path& dir) {
  if (trace.snapshots.empty()) throw InvalidInput("export_geometry: trace has no snapshots");
  std::string snaps = "snapshot,edge,point,x,y,z\n";
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    const Net& net = trace.snapshots[s].net;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      const auto& edge = net.edges[e];
      if (edge.trivial()) {
        append_point_row(snaps, s, e, 0, net.vertices.at(static_cast<std::size_t>(edge.from)));
        continue;
      }
      for (std::size_t k = 0; k < edge.polyline.size(); ++k) append_point_row(snaps, s, e, k, edge.polyline[k]);
    }
  }
  std::string lengths = "iteration,weighted_length\n";
  for (const auto& [it, l] : trace.lengths) {
    lengths += std::to_string(it) + ',';
    append_number(lengths, l);
    lengths += '\n';
  }
  write_atomic(dir / "snapshots.csv", snaps);
  write_atomic(dir / "lengths.csv", lengths);
}

// ---------------------------------------------------------------------------
// Runs

namespace {

struct Setup {
  ManifoldPtr manifold;
  double diameter = 0.0;
  std::string diameter_source;
  std::optional<double> area;
  std::string area_source;
  int q = 1;

  json to_json() const {
    json j = {{"manifold", manifold_to_json(*manifold)},
              {"diameter", quantity(diameter, "length")},
              {"diameter_source", diameter_source},
              {"q", q}};
    if (area) {
      j["volume"] = quantity(*area, "area");
      j["volume_source"] = area_source;
    }
    return j;
  }
};

Setup make_setup(const ExperimentConfig& c) {
  Setup s;
  s.manifold = manifold_from_json(c.manifold);
  if (c.diameter) {
    s.diameter = *c.diameter;
    s.diameter_source = "config";
  } else if (auto d = s.manifold->exact_diameter()) {
    s.diameter = *d;
    s.diameter_source = "closed-form";
  } else {
    s.diameter = diameter_estimate(*s.manifold, c.diameter_samples, 0).value;
    s.diameter_source = "sampled-estimate";
  }
  if (c.volume) {
    s.area = c.volume;
    s.area_source = "config";
  } else if ((s.area = closed_form_area(*s.manifold))) {
    s.area_source = "closed-form";
  }
  s.q = c.q.value_or(default_q(s.manifold->kind()));
  if (s.q > c.n) s.q = c.n;
  return s;
}

bounds::BoundQuery bound_query(const ExperimentConfig& c, const Setup& s, int a,
                               const std::optional<EpsilonInput>& eps) {
  bounds::BoundQuery q;
  q.n = c.n;
  q.q = s.q;
  q.diameter = s.diameter;
  q.volume = s.area;
  q.fillrad = c.fillrad;
  if (eps) {
    q.epsilon = eps->radians;
    q.epsilon_exact = eps->exact;
  } else {
    q.weight_base = a;
  }
  return q;
}

json trace_summary(const FlowTrace& t) {
  json events = json::array();
  for (const auto& e : t.events) events.push_back(event_to_json(e));
  json j = {{"status", to_string(t.status)},
            {"iterations", t.iterations},
            {"snapshots", t.snapshots.size()},
            {"events", events},
            {"monotonicity_violations", t.monotonicity_violations}};
  if (!t.lengths.empty()) {
    j["initial_length"] = quantity(t.lengths.front().second, "weighted-length");
    j["final_length"] = quantity(t.lengths.back().second, "weighted-length");
    j["envelope_max"] = quantity(length_envelope(t).max, "weighted-length");
  }
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

fs::path run_dir(const ExperimentConfig& c, int index) {
  char name[32];
  std::snprintf(name, sizeof name, "run_%04d", index);
  return fs::path(c.output_dir) / "runs" / name;
}

/// One flow from a seeded initial net through analysis and bound checks.
void flow_run(const ExperimentConfig& c, const Setup& s, int a, const std::optional<EpsilonInput>& eps,
              double epsilon, RunRecord& rec) {
  const ManifoldPtr& m = s.manifold;
  std::mt19937_64 rng(rec.seed);
  Net initial;
  if (c.kind == ExperimentKind::SkeletonFlow) {
    std::vector<Point> pts;
    for (int i = 0; i < c.vertex_count; ++i) pts.push_back(m->sample(rng));
    initial = make_skeleton_net(m, pts);
  } else {
    const Point p1 = m->sample(rng);
    const Point p2 = c.initialization == "antipodal" ? m->antipode(p1) : m->sample(rng);
    initial = make_cage(m, p1, p2, c.k, rec.seed);
  }

  FlowParams p = flow_params_from_json(c.flow, FlowParams::defaults(a, initial.max_exponent(), s.diameter));
  p.validate();

  const bool files = !c.output_dir.empty();
  const fs::path dir = files ? run_dir(c, rec.index) : fs::path();
  const fs::path checkpoint_path = dir / "checkpoint.json";
  FlowOptions options;
  if (files && c.checkpoints) {
    options.on_checkpoint = [&](const FlowCheckpoint& cp) {
      write_atomic(checkpoint_path, checkpoint_to_json(cp, p).dump());
    };
  }

  FlowTrace trace;
  bool resumed = false;
  if (files && c.resume && fs::exists(checkpoint_path)) {
    auto [cp, saved] = checkpoint_from_json(json::parse(read_file(checkpoint_path)));
    if (flow_params_to_json(saved) != flow_params_to_json(p)) {
      throw InvalidInput("checkpoint " + checkpoint_path.string() + " was written with different flow parameters");
    }
    trace = resume_flow(cp, p, options);
    resumed = true;
  } else {
    trace = run_flow(initial, p, options);
  }

  json& r = rec.result;
  r["weight_base"] = a;
  r["epsilon"] = quantity(epsilon, "rad");
  r["params"] = flow_params_to_json(p);
  r["initial"] = {{"vertices", initial.vertices.size()},
                  {"edges", initial.edges.size()},
                  {"weighted_length", quantity(weighted_length(initial, a), "weighted-length")}};
  r["trace"] = trace_summary(trace);
  r["resumed"] = resumed;

  if (!trace.monotonicity_violations.empty()) {
    rec.violations.push_back("weighted length increased at " + std::to_string(trace.monotonicity_violations.size()) +
                             " iterations");
  }
  if (trace.status == TerminalStatus::Failed || trace.snapshots.empty()) {
    rec.error = trace.error.empty() ? "flow produced no snapshot" : trace.error;
    if (files) write_atomic(dir / "trace.json", trace_to_json(trace).dump());
    return;
  }

  const Net& final_net = trace.snapshots.back().net;
  StationarityReport report = analyze(final_net, p);
  if ((report.net_class == NetClass::Flower || report.net_class == NetClass::PeriodicGeodesic) &&
      !report.petals.empty()) {
    report.verdict = wide_loop_verdict(report, a, epsilon);
  }
  const bounds::Compliance compliance = bounds::check_against_bounds(report, trace, bound_query(c, s, a, eps));
  r["stationarity"] = stationarity_to_json(report);
  r["compliance"] = compliance_to_json(compliance);
  r["final_net"] = net_to_json(final_net);

  if (trace.status == TerminalStatus::Converged && report.net_class == NetClass::Cage) {
    rec.violations.push_back("flow converged to a non-degenerate cage");
  }
  if (report.verdict && !report.verdict->passed) rec.violations.push_back("wide-loop verdict failed");
  for (const auto& check : compliance.checks) {
    if (!check.passed) rec.violations.push_back("bound check failed: " + check.name);
  }

  if (files) {
    write_atomic(dir / "trace.json", trace_to_json(trace).dump());
    export_geometry(trace, dir);
  }
  rec.completed = true;
}

void oracle_run(const ExperimentConfig& c, RunRecord& rec) {
  const int a = c.resolved_a();
  json& r = rec.result;
  r["mode"] = to_string(c.oracle_mode);
  r["weight_base"] = a;
  r["dimension"] = c.dimension;
  constexpr double kTolerance = 1e-6;
  switch (c.oracle_mode) {
    case OracleMode::Cage: {
      const auto res = oracle::min_cage_residual(c.k, a, c.dimension, c.restarts, rec.seed);
      r["k"] = c.k;
      r["oracle"] = oracle_to_json(res);
      if (std::abs(res.gap()) > kTolerance) rec.violations.push_back("oracle minimum disagrees with the closed form");
      break;
    }
    case OracleMode::Flower: {
      const auto res = oracle::min_flower_residual(c.s, a, c.theta, c.dimension, c.restarts, rec.seed);
      const auto bal = oracle::flower_balance(c.s, a, c.theta);
      r["s"] = c.s;
      r["theta"] = quantity(c.theta, "rad");
      r["oracle"] = oracle_to_json(res);
      r["balance"] = {{"top", quantity(bal.top, "weighted")},
                      {"lower_total", quantity(bal.lower_total, "weighted")},
                      {"attainable", bal.attainable}};
      if (std::abs(res.gap()) > kTolerance) rec.violations.push_back("oracle minimum disagrees with the closed form");
      if (bal.attainable != (res.minimized <= kTolerance)) {
        rec.violations.push_back("balance inequality disagrees with the oracle minimum");
      }
      break;
    }
    case OracleMode::Merging: {
      const auto res = oracle::merging_lemma_check(c.vertex_count, a, c.dimension, c.restarts);
      r["merging"] = merging_to_json(res);
      if (!res.all_dominant) rec.violations.push_back("a vertex or merged cluster lacks a dominant weight");
      break;
    }
  }
  rec.completed = true;
}

void bounds_run(const ExperimentConfig& c, const Setup& s, RunRecord& rec) {
  const bounds::BoundQuery q = bound_query(c, s, c.resolved_a(), c.epsilon);
  const bounds::BoundReport report = bounds::compute_bounds(q);
  json& r = rec.result;
  r["query"] = {{"n", q.n}, {"q", q.q}, {"diameter", quantity(q.diameter, "length")}};
  if (q.volume) r["query"]["volume"] = quantity(*q.volume, "area");
  if (q.fillrad) r["query"]["fillrad"] = quantity(*q.fillrad, "length");
  r["bounds"] = bounds_to_json(report);
  const auto order = bounds::fillrad_ordering(q.n);
  r["fillrad_ordering"] = {{"nabutovsky_le_wenger", order.nabutovsky_le_wenger},
                           {"wenger_le_gromov", order.wenger_le_gromov},
                           {"wenger_gromov_crossover", bounds::wenger_gromov_crossover()}};
  rec.completed = true;
}

void write_sweep_table(const ReportDocument& doc, const fs::path& path) {
  std::string out = "epsilon,a,seed,status,angle_defect,bound_margin\n";
  for (const auto& r : doc.runs) {
    const json& res = r.result;
    std::string eps, a, status = r.completed ? "" : "failed", defect, margin;
    if (res.contains("epsilon")) append_number(eps, res["epsilon"]["value"].get<double>());
    if (res.contains("weight_base")) a = std::to_string(res["weight_base"].get<int>());
    if (res.contains("trace")) status = res["trace"]["status"].get<std::string>();
    if (res.contains("stationarity") && res["stationarity"].contains("wide_loop")) {
      append_number(defect, res["stationarity"]["wide_loop"]["angle_defect"]["value"].get<double>());
    }
    if (res.contains("compliance")) {
      for (const auto& check : res["compliance"]["checks"]) {
        if (check["name"] == "diameter: wide petal") append_number(margin, check["margin"]["value"].get<double>());
      }
    }
    out += eps + ',' + a + ',' + std::to_string(r.seed) + ',' + status + ',' + defect + ',' + margin + '\n';
  }
  write_atomic(path, out);
}

}  // namespace

ReportDocument run_experiment(const ExperimentConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  ReportDocument doc;
  doc.config = config_to_json(config);

  std::optional<Setup> setup;
  if (config.kind != ExperimentKind::Oracle) {
    setup = make_setup(config);
    doc.setup = setup->to_json();
  }

  const auto seeds = config.seed_list();
  std::vector<std::function<void(RunRecord&)>> tasks;
  std::vector<RunRecord> runs;
  auto add = [&](std::uint64_t seed, std::function<void(RunRecord&)> task) {
    RunRecord r;
    r.index = static_cast<int>(runs.size());
    r.kind = to_string(config.kind);
    r.seed = seed;
    runs.push_back(std::move(r));
    tasks.push_back(std::move(task));
  };

  switch (config.kind) {
    case ExperimentKind::CageFlow:
    case ExperimentKind::SkeletonFlow: {
      const int a = config.resolved_a();
      const double eps = config.resolved_epsilon();
      for (auto seed : seeds) {
        add(seed, [&, a, eps](RunRecord& r) { flow_run(config, *setup, a, config.epsilon, eps, r); });
      }
      break;
    }
    case ExperimentKind::Sweep:
      for (const auto& e : config.epsilons) {
        for (auto seed : seeds) {
          add(seed, [&, e](RunRecord& r) { flow_run(config, *setup, e.a(), e, e.radians, r); });
        }
      }
      break;
    case ExperimentKind::Oracle:
      for (auto seed : seeds) add(seed, [&](RunRecord& r) { oracle_run(config, r); });
      break;
    case ExperimentKind::Bounds:
      add(0, [&](RunRecord& r) { bounds_run(config, *setup, r); });
      break;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      RunRecord& r = runs[i];
      const auto t0 = clock::now();
      try {
        tasks[i](r);
      } catch (const std::exception& e) {
        r.completed = false;
        r.error = e.what();
      }
      r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    }
  };
  const std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), tasks.size());
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nworkers; ++i) pool.emplace_back(worker);
  }

  doc.runs = std::move(runs);
  doc.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  if (!config.output_dir.empty()) {
    const fs::path out(config.output_dir);
    if (config.kind == ExperimentKind::Sweep) write_sweep_table(doc, out / "sweep.csv");
    write_atomic(out / "report.json", doc.to_json().dump(2) + "\n");
  }
  return doc;
}

}  // namespace geonet
