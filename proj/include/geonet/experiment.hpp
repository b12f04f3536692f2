#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geonet/bounds.hpp"
#include "geonet/flow.hpp"
#include "geonet/serialize.hpp"

namespace geonet {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class ExperimentKind { CageFlow, SkeletonFlow, Oracle, Bounds, Sweep };
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class OracleMode { Cage, Flower, Merging };
std::string to_string(OracleMode m);
OracleMode oracle_mode_from_string(std::string_view name);

/// An angle given either in radians or exactly as p/q of pi.
struct EpsilonInput {
  double radians = 0.0;
  std::optional<bounds::PiFraction> exact;

  int a() const;
  json to_json() const;
  static EpsilonInput from_json(const json& j);
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CageFlow;
  json manifold = {{"kind", "round-sphere"}, {"parameters", {{"radius", 1.0}}}};

  // Seeds are base_seed, base_seed + 1, ... unless listed explicitly.
  std::uint64_t base_seed = 0;
  int repeat = 1;
  std::vector<std::uint64_t> seeds;

  int k = 3;                // cage edges
  int vertex_count = 3;     // skeleton and merging vertices
  /// "antipodal" (second cage vertex at the antipode) or "random".
  std::string initialization = "antipodal";

  std::optional<int> a;
  std::optional<EpsilonInput> epsilon;
  std::vector<EpsilonInput> epsilons;  // sweep grid

  json flow = json::object();  // FlowParams overrides
  bool checkpoints = true;

  // Bound query; q defaults per model, volume to the closed-form area.
  int n = 2;
  std::optional<int> q;
  std::optional<double> diameter;
  std::optional<double> volume;
  std::optional<double> fillrad;
  int diameter_samples = 64;

  OracleMode oracle_mode = OracleMode::Cage;
  int dimension = 2;
  int restarts = oracle::kDefaultRestarts;
  int s = 1;
  double theta = 0.0;

  int workers = 1;
  std::string output_dir;
  bool resume = false;

  /// Explicit seed list after applying base_seed and repeat.
  std::vector<std::uint64_t> seed_list() const;
  /// Weight base: `a` when given, otherwise from epsilon.
  int resolved_a() const;
  /// Epsilon for wide-loop verdicts: as given, else the smallest angle
  /// whose weight base is `a`, 2 asin(1/(a-1)).
  double resolved_epsilon() const;
};

/// Parses and validates; throws InvalidInput naming every problem.
ExperimentConfig parse_config(const json& j);
/// Full config with all defaults filled in.
json config_to_json(const ExperimentConfig& c);

struct RunRecord {
  int index = 0;
  std::string kind;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  json result = json::object();
  std::vector<std::string> violations;  // asserted invariants that failed
  double seconds = 0.0;

  bool ok() const { return completed && violations.empty(); }
  bool operator==(const RunRecord&) const = default;
};

struct ReportDocument {
  json config;
  json setup = json::object();  // resolved manifold, diameter, area, bound query
  std::vector<RunRecord> runs;
  double total_seconds = 0.0;

  bool all_ok() const;
  json to_json() const;
  /// Everything except the timings section.
  json numeric_payload() const;
  static ReportDocument from_json(const json& j);
  bool operator==(const ReportDocument&) const = default;
};

ReportDocument run_experiment(const ExperimentConfig& config);

/// Writes snapshots.csv (snapshot, edge, point, x, y, z) and lengths.csv
/// (iteration, weighted_length) into `dir`. A trivial edge contributes one
/// row at its vertex.
void export_geometry(const FlowTrace& trace, const std::filesystem::path& dir);

/// Closed-form surface area where one exists.
std::optional<double> closed_form_area(const Manifold& m);

}  // namespace geonet
