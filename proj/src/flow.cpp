#include "geonet/flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "geonet/errors.hpp"
#include "geonet/polyline.hpp"

namespace geonet {

FlowParams FlowParams::defaults(int a, int max_exponent, double diameter) {
  FlowParams p;
  p.a = a;
  p.rho_e = 1e-3 * diameter;
  p.rho_v = 1e-3 * diameter;
  p.eta = 5e-4 * diameter;
  p.sigma = 1e-4 * std::pow(static_cast<double>(a), std::max(0, max_exponent));
  return p;
}

void FlowParams::validate() const {
  std::vector<std::string> problems;
  if (a < 3) problems.push_back("a must be >= 3");
  if (!(eta > 0.0)) problems.push_back("eta must be positive");
  if (!(rho_e > 0.0)) problems.push_back("rho_e must be positive");
  if (!(rho_v > 0.0)) problems.push_back("rho_v must be positive");
  if (!(sigma > 0.0)) problems.push_back("sigma must be positive");
  if (!(eta < rho_v)) problems.push_back("eta must be below rho_v");
  if (max_iterations < 0) problems.push_back("max_iterations must be >= 0");
  if (record_every < 1) problems.push_back("record_every must be >= 1");
  if (spacing < 0.0) problems.push_back("spacing must be >= 0");
  if (edge_tolerance < 0.0) problems.push_back("edge_tolerance must be >= 0");
  if (problems.empty()) return;
  std::string msg = "invalid flow parameters:";
  for (const auto& s : problems) msg += " " + s + ";";
  throw InvalidInput(msg);
}

double FlowParams::effective_spacing(const Manifold& m) const {
  return spacing > 0.0 ? spacing : m.base_step();
}

double FlowParams::effective_edge_tolerance(const Manifold& m) const {
  return edge_tolerance > 0.0 ? edge_tolerance : 1e-6 * effective_spacing(m);
}

std::string to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::Converged: return "converged";
    case TerminalStatus::CollapsedToPoint: return "collapsed-to-point";
    case TerminalStatus::MaxIterations: return "max-iterations";
    case TerminalStatus::Failed: return "failed";
  }
  return "failed";
}

TerminalStatus terminal_status_from_string(std::string_view name) {
  if (name == "converged") return TerminalStatus::Converged;
  if (name == "collapsed-to-point") return TerminalStatus::CollapsedToPoint;
  if (name == "max-iterations") return TerminalStatus::MaxIterations;
  if (name == "failed") return TerminalStatus::Failed;
  throw InvalidInput("unknown terminal status '" + std::string(name) + "'");
}

std::string to_string(EventKind k) {
  return k == EventKind::EdgeCollapsed ? "edge-collapsed" : "vertices-merged";
}

EventKind event_kind_from_string(std::string_view name) {
  if (name == "edge-collapsed") return EventKind::EdgeCollapsed;
  if (name == "vertices-merged") return EventKind::VerticesMerged;
  throw InvalidInput("unknown event kind '" + std::string(name) + "'");
}

namespace {

// Weighted length of the polyline segments touching vertex v if v sat at x.
double end_segments(const Net& net, int v, const Point& x, double a) {
  const Manifold& m = *net.manifold;
  double sum = 0.0;
  for (const auto& e : net.edges) {
    if (e.trivial() || (e.from != v && e.to != v)) continue;
    const double w = std::pow(a, e.exponent);
    const Polyline& pl = e.polyline;
    if (pl.size() == 2) {
      const Point& p = e.from == v ? x : pl.front();
      const Point& q = e.to == v ? x : pl.back();
      sum += w * m.step_distance(p, q);
      continue;
    }
    if (e.from == v) sum += w * m.step_distance(x, pl[1]);
    if (e.to == v) sum += w * m.step_distance(pl[pl.size() - 2], x);
  }
  return sum;
}

void place_vertex(Net& net, int v, const Point& x) {
  net.vertices[static_cast<std::size_t>(v)] = x;
  for (auto& e : net.edges) {
    if (e.trivial()) continue;
    if (e.from == v) e.polyline.front() = x;
    if (e.to == v) e.polyline.back() = x;
  }
}

// Backtracked step of vertex v along its residual; true if it moved.
bool move_vertex(Net& net, int v, const Vec3& residual, const FlowParams& p) {
  const Manifold& m = *net.manifold;
  const double a = static_cast<double>(p.a);
  const double norm = residual.norm();
  if (!(norm > p.sigma)) return false;
  const Point& x0 = net.vertices[static_cast<std::size_t>(v)];
  const Vec3 dir = residual / norm;
  const double before = end_segments(net, v, x0, a);
  double t = p.eta;
  for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
    const Point x = m.retract(x0, t * dir);
    if (end_segments(net, v, x, a) < before) {
      place_vertex(net, v, x);
      return true;
    }
  }
  return false;
}

// Merge vertex j into i at position x; edges between them become loops.
void merge_into(Net& net, int i, int j, const Point& x) {
  for (auto& e : net.edges) {
    if (e.from == j) e.from = i;
    if (e.to == j) e.to = i;
    if (e.from > j) --e.from;
    if (e.to > j) --e.to;
  }
  net.vertices.erase(net.vertices.begin() + j);
  const int kept = i < j ? i : i - 1;
  place_vertex(net, kept, x);
}

// Lowest (i, j), i < j, that must merge: joined by a trivial edge or closer
// than rho_v.
std::optional<std::pair<int, int>> next_merge(const Net& net, double rho_v) {
  const Manifold& m = *net.manifold;
  const int nv = static_cast<int>(net.vertices.size());
  std::optional<std::pair<int, int>> best;
  for (const auto& e : net.edges) {
    if (!e.trivial() || e.is_loop()) continue;
    const std::pair<int, int> pr{std::min(e.from, e.to), std::max(e.from, e.to)};
    if (!best || pr < *best) best = pr;
  }
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      if (best && std::pair<int, int>{i, j} >= *best) break;
      if (m.chord(net.vertices[static_cast<std::size_t>(i)], net.vertices[static_cast<std::size_t>(j)])
              .norm() < rho_v) {
        best = std::pair<int, int>{i, j};
        break;
      }
    }
  }
  return best;
}

void collapse_short_edges(Net& net, const FlowParams& p, long iteration,
                          std::vector<FlowEvent>& events) {
  const Manifold& m = *net.manifold;
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    auto& e = net.edges[k];
    if (e.trivial()) continue;
    if (polyline_length(m, e.polyline) < p.rho_e) {
      e.polyline.clear();
      events.push_back({EventKind::EdgeCollapsed, iteration, static_cast<int>(k), -1, -1});
    }
  }
}

void merge_vertices(Net& net, const FlowParams& p, long iteration, std::vector<FlowEvent>& events) {
  const double a = static_cast<double>(p.a);
  while (auto pr = next_merge(net, p.rho_v)) {
    const auto [i, j] = *pr;
    // Keep whichever of the two positions gives the smaller weighted length.
    Net at_i = net;
    merge_into(at_i, i, j, net.vertices[static_cast<std::size_t>(i)]);
    Net at_j = net;
    merge_into(at_j, i, j, net.vertices[static_cast<std::size_t>(j)]);
    net = weighted_length(at_j, a) < weighted_length(at_i, a) ? std::move(at_j) : std::move(at_i);
    events.push_back({EventKind::VerticesMerged, iteration, -1, i, j});
    // Loops squeezed to a single repeated point are trivial petals now.
    for (std::size_t k = 0; k < net.edges.size(); ++k) {
      auto& e = net.edges[k];
      if (e.trivial()) continue;
      if (polyline_length(*net.manifold, e.polyline) == 0.0) {
        e.polyline.clear();
        events.push_back({EventKind::EdgeCollapsed, iteration, static_cast<int>(k), -1, -1});
      }
    }
  }
}

bool has_pending_degeneration(const Net& net, const FlowParams& p) {
  const Manifold& m = *net.manifold;
  for (const auto& e : net.edges) {
    if (e.trivial()) {
      if (!e.is_loop()) return true;
      continue;
    }
    if (polyline_length(m, e.polyline) < p.rho_e) return true;
  }
  return next_merge(net, p.rho_v).has_value();
}

double max_norm(const std::vector<Vec3>& vs) {
  double out = 0.0;
  for (const auto& v : vs) out = std::max(out, v.norm());
  return out;
}

bool collapsed_to_point(const Net& net) {
  if (net.vertices.size() != 1) return false;
  return std::all_of(net.edges.begin(), net.edges.end(), [](const WeightedEdge& e) { return e.trivial(); });
}

}  // namespace

std::pair<Net, StepReport> shorten_step(const Net& net, const FlowParams& p, long iteration) {
  p.validate();
  if (!net.manifold) throw InvalidInput("shorten_step: net has no manifold");
  const Manifold& m = *net.manifold;
  const double a = static_cast<double>(p.a);
  const double spacing = p.effective_spacing(m);
  const double span = m.coarse_span_limit();

  StepReport rep;
  Net out = net;
  rep.length_before = weighted_length(out, a);

  for (auto& e : out.edges) {
    if (e.trivial() || e.polyline.size() < 3) continue;
    const SweepStats st = relax_sweep(m, e.polyline, span);
    rep.max_lateral = std::max(rep.max_lateral, st.max_lateral);
  }

  for (int v = 0; v < static_cast<int>(out.vertices.size()); ++v) {
    const Vec3 r = vertex_residuals(out, a)[static_cast<std::size_t>(v)];
    if (move_vertex(out, v, m.tangent_project(out.vertices[static_cast<std::size_t>(v)], r), p)) {
      ++rep.vertex_moves;
    }
  }

  collapse_short_edges(out, p, iteration, rep.events);
  merge_vertices(out, p, iteration, rep.events);

  for (auto& e : out.edges) {
    if (!e.trivial()) resample(m, e.polyline, spacing);
  }
  for (std::size_t v = 0; v < out.vertices.size(); ++v) {
    if (!out.vertices[v].allFinite()) {
      std::ostringstream msg;
      msg << "shorten_step: vertex " << v << " became non-finite at iteration " << iteration;
      throw NumericalError(msg.str());
    }
  }
  try {
    out.validate();
  } catch (const InvalidState& e) {
    throw InternalError(std::string("shorten_step produced an inconsistent net: ") + e.what());
  }

  rep.length_after = weighted_length(out, a);
  rep.max_residual = max_norm(vertex_residuals(out, a));
  rep.pending_degeneration = has_pending_degeneration(out, p);
  return {std::move(out), std::move(rep)};
}

namespace {

FlowTrace continue_flow(FlowTrace trace, Net net, long start, const FlowParams& p,
                        const FlowOptions& options) {
  const double a = static_cast<double>(p.a);
  const double edge_tol = p.effective_edge_tolerance(*net.manifold);
  auto record = [&](long it, const Net& n, double length, double residual) {
    if (!trace.snapshots.empty() && trace.snapshots.back().iteration == it) return;
    trace.snapshots.push_back({it, n, length, residual});
  };

  if (start == 0 && trace.lengths.empty()) {
    const double l0 = weighted_length(net, a);
    trace.lengths.emplace_back(0, l0);
    record(0, net, l0, max_norm(vertex_residuals(net, a)));
    if (collapsed_to_point(net)) {
      trace.status = TerminalStatus::CollapsedToPoint;
      trace.iterations = 0;
      return trace;
    }
  }

  double previous = trace.lengths.empty() ? weighted_length(net, a) : trace.lengths.back().second;
  for (long it = start + 1; it <= p.max_iterations; ++it) {
    StepReport rep;
    try {
      auto [next, r] = shorten_step(net, p, it);
      net = std::move(next);
      rep = std::move(r);
    } catch (const std::exception& e) {
      trace.status = TerminalStatus::Failed;
      trace.error = e.what();
      trace.iterations = it - 1;
      return trace;
    }
    trace.iterations = it;
    trace.lengths.emplace_back(it, rep.length_after);
    if (rep.length_after > previous * (1.0 + 1e-9)) trace.monotonicity_violations.push_back(it);
    previous = rep.length_after;
    trace.events.insert(trace.events.end(), rep.events.begin(), rep.events.end());

    bool done = false;
    if (collapsed_to_point(net)) {
      trace.status = TerminalStatus::CollapsedToPoint;
      done = true;
    } else if (!rep.pending_degeneration && rep.max_residual < p.sigma && rep.max_lateral <= edge_tol) {
      trace.status = TerminalStatus::Converged;
      done = true;
    }
    if (done || !rep.events.empty() || it % p.record_every == 0) {
      record(it, net, rep.length_after, rep.max_residual);
    }
    if (options.on_checkpoint && it % p.record_every == 0) {
      options.on_checkpoint(FlowCheckpoint{trace, net, it});
    }
    if (done) return trace;
  }
  trace.status = TerminalStatus::MaxIterations;
  trace.iterations = std::max(trace.iterations, start);
  record(trace.iterations, net, previous, max_norm(vertex_residuals(net, a)));
  return trace;
}

}  // namespace

FlowTrace run_flow(const Net& net, const FlowParams& p, const FlowOptions& options) {
  p.validate();
  net.validate();
  return continue_flow(FlowTrace{}, net, 0, p, options);
}

FlowTrace resume_flow(const FlowCheckpoint& checkpoint, const FlowParams& p,
                      const FlowOptions& options) {
  p.validate();
  checkpoint.current.validate();
  return continue_flow(checkpoint.trace, checkpoint.current, checkpoint.iteration, p, options);
}

LengthEnvelope length_envelope(const FlowTrace& trace) {
  if (trace.lengths.empty()) throw InvalidInput("length_envelope: empty trace");
  LengthEnvelope env;
  env.series = trace.lengths;
  env.max = trace.lengths.front().second;
  env.argmax = trace.lengths.front().first;
  for (const auto& [it, l] : trace.lengths) {
    if (l > env.max) {
      env.max = l;
      env.argmax = it;
    }
  }
  return env;
}

}  // namespace geonet
