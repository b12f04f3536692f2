#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "geonet/net.hpp"

namespace geonet {

struct FlowParams {
  int a = 3;
  double eta = 0.0;     // vertex step, arclength
  double rho_e = 0.0;   // edge-collapse tolerance, arclength
  double rho_v = 0.0;   // vertex-merge tolerance, arclength
  double sigma = 0.0;   // stationarity tolerance on the residual norm
  long max_iterations = 200000;
  long record_every = 1000;
  /// Target point spacing of edge polylines (0: the model's base step).
  double spacing = 0.0;
  /// An edge counts as relaxed once a sweep moves no point further than
  /// this across the curve (0: 1e-6 * spacing).
  double edge_tolerance = 0.0;

  /// Defaults for a net on a model of diameter d: rho_e = rho_v = 1e-3 d,
  /// eta = 5e-4 d, sigma = 1e-4 a^max_exponent.
  static FlowParams defaults(int a, int max_exponent, double diameter);
  /// Throws InvalidInput listing every violated constraint.
  void validate() const;
  double effective_spacing(const Manifold& m) const;
  double effective_edge_tolerance(const Manifold& m) const;
};

enum class TerminalStatus { Converged, CollapsedToPoint, MaxIterations, Failed };
std::string to_string(TerminalStatus s);
TerminalStatus terminal_status_from_string(std::string_view name);

enum class EventKind { EdgeCollapsed, VerticesMerged };
std::string to_string(EventKind k);
EventKind event_kind_from_string(std::string_view name);

/// Degeneration event. Edge indices are stable for the lifetime of a flow;
/// vertex indices are those of the net before the merge.
struct FlowEvent {
  EventKind kind = EventKind::EdgeCollapsed;
  long iteration = 0;
  int edge = -1;
  int vertex_kept = -1;
  int vertex_removed = -1;

  bool operator==(const FlowEvent&) const = default;
};

struct StepReport {
  double length_before = 0.0;
  double length_after = 0.0;
  double max_residual = 0.0;   // after the step
  double max_lateral = 0.0;    // largest sweep move across an edge
  int vertex_moves = 0;
  bool pending_degeneration = false;
  std::vector<FlowEvent> events;
};

/// One iteration: a relaxation sweep on every edge, a backtracked vertex
/// step along the residual, then edge collapse and vertex merging.
std::pair<Net, StepReport> shorten_step(const Net& net, const FlowParams& p, long iteration = 0);

struct Snapshot {
  long iteration = 0;
  Net net;
  double weighted_length = 0.0;
  double max_residual = 0.0;
};

struct FlowTrace {
  std::vector<Snapshot> snapshots;
  std::vector<FlowEvent> events;
  /// Weighted length after every iteration, starting with iteration 0.
  std::vector<std::pair<long, double>> lengths;
  TerminalStatus status = TerminalStatus::MaxIterations;
  long iterations = 0;
  /// Iterations whose weighted length rose by more than the 1e-9 slack.
  std::vector<long> monotonicity_violations;
  std::string error;
};

/// State needed to continue a flow exactly where it stopped.
struct FlowCheckpoint {
  FlowTrace trace;
  Net current;
  long iteration = 0;
};

struct FlowOptions {
  /// Called every record_every iterations with the state after that
  /// iteration.
  std::function<void(const FlowCheckpoint&)> on_checkpoint;
};

FlowTrace run_flow(const Net& net, const FlowParams& p, const FlowOptions& options = {});
FlowTrace resume_flow(const FlowCheckpoint& checkpoint, const FlowParams& p,
                      const FlowOptions& options = {});

struct LengthEnvelope {
  std::vector<std::pair<long, double>> series;
  double max = 0.0;
  long argmax = 0;
};
LengthEnvelope length_envelope(const FlowTrace& trace);

}  // namespace geonet
