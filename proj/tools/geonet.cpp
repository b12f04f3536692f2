#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "geonet/errors.hpp"
#include "geonet/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunsFailed = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool resume = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool resumable) {
  sub->add_option("--config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides output_dir)");
  sub->add_option("--workers", f.workers, "concurrent runs")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "base seed (replaces seeds; runs use seed, seed+1, ...)");
  if (resumable) sub->add_flag("--resume", f.resume, "continue flows from their checkpoints");
}

bool kind_matches(const std::string& command, geonet::ExperimentKind kind) {
  using geonet::ExperimentKind;
  if (command == "flow") return kind == ExperimentKind::CageFlow || kind == ExperimentKind::SkeletonFlow;
  if (command == "oracle") return kind == ExperimentKind::Oracle;
  if (command == "bounds") return kind == ExperimentKind::Bounds;
  if (command == "sweep") return kind == ExperimentKind::Sweep;
  return false;
}

void print_summary(const geonet::ReportDocument& doc, const std::string& out) {
  int completed = 0, ok = 0;
  for (const auto& r : doc.runs) {
    completed += r.completed;
    ok += r.ok();
    if (!r.completed) std::cerr << "run " << r.index << " (seed " << r.seed << ") failed: " << r.error << "\n";
    for (const auto& v : r.violations) std::cerr << "run " << r.index << " (seed " << r.seed << "): " << v << "\n";
  }
  std::cout << doc.runs.size() << " runs, " << completed << " completed, " << ok << " with all invariants held\n";
  if (!out.empty()) std::cout << "report: " << out << "/report.json\n";
}

int run_command(const std::string& command, const CommonFlags& f) {
  geonet::json j;
  try {
    j = geonet::json::parse(geonet::read_file(f.config));
  } catch (const std::exception& e) {
    std::cerr << f.config << ": " << e.what() << "\n";
    return kExitUsage;
  }
  if (!f.out.empty()) j["output_dir"] = f.out;
  if (f.workers) j["workers"] = *f.workers;
  if (f.seed) {
    j.erase("seeds");
    j["seed"] = *f.seed;
  }
  if (f.resume) j["resume"] = true;

  geonet::ExperimentConfig config;
  try {
    config = geonet::parse_config(j);
  } catch (const geonet::InvalidInput& e) {
    std::cerr << f.config << ": " << e.what() << "\n";
    return kExitUsage;
  }
  if (!kind_matches(command, config.kind)) {
    std::cerr << "'" << command << "' cannot run a config of kind '" << geonet::to_string(config.kind) << "'\n";
    return kExitUsage;
  }

  const geonet::ReportDocument doc = geonet::run_experiment(config);
  if (config.output_dir.empty()) std::cout << doc.to_json().dump(2) << "\n";
  print_summary(doc, config.output_dir);
  return doc.all_ok() ? kExitOk : kExitRunsFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted length-shortening flow on nets, lemma oracles and exact length bounds"};
  app.set_version_flag("--version", std::string(geonet::kArtifactVersion));
  app.require_subcommand(1);

  CommonFlags flow_flags, oracle_flags, bounds_flags, sweep_flags;
  auto* flow = app.add_subcommand("flow", "run cage-flow or skeleton-flow experiments");
  add_common(flow, flow_flags, true);
  auto* oracle = app.add_subcommand("oracle", "minimize tangent residuals of cage, flower or merged vertices");
  add_common(oracle, oracle_flags, false);
  auto* bounds = app.add_subcommand("bounds", "evaluate the exact length bounds");
  add_common(bounds, bounds_flags, false);
  auto* sweep = app.add_subcommand("sweep", "grid of cage flows over epsilon and seeds");
  add_common(sweep, sweep_flags, true);

  std::string trace_path, export_out;
  auto* exp = app.add_subcommand("export", "write CSV geometry from a saved trace.json");
  exp->add_option("--trace", trace_path, "trace file written by a flow run")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", export_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (flow->parsed()) return run_command("flow", flow_flags);
    if (oracle->parsed()) return run_command("oracle", oracle_flags);
    if (bounds->parsed()) return run_command("bounds", bounds_flags);
    if (sweep->parsed()) return run_command("sweep", sweep_flags);
    if (exp->parsed()) {
      const auto trace = geonet::trace_from_json(geonet::json::parse(geonet::read_file(trace_path)));
      geonet::export_geometry(trace, export_out);
      std::cout << "wrote " << export_out << "/snapshots.csv and " << export_out << "/lengths.csv\n";
      return kExitOk;
    }
  } catch (const geonet::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunsFailed;
  }
  return kExitUsage;
}
