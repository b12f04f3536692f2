#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "geonet/analysis.hpp"
#include "geonet/bounds.hpp"
#include "geonet/flow.hpp"
#include "geonet/net.hpp"
#include "geonet/oracle.hpp"

namespace geonet {

using json = nlohmann::json;

inline constexpr int kNetFormatVersion = 1;

json manifold_to_json(const Manifold& m);
ManifoldPtr manifold_from_json(const json& j);

/// Nets carry their manifold descriptor; coordinates are written with
/// round-trip precision.
json net_to_json(const Net& net);
/// Rebuilds the manifold from the descriptor unless `manifold` is given.
Net net_from_json(const json& j, ManifoldPtr manifold = nullptr);

json flow_params_to_json(const FlowParams& p);
FlowParams flow_params_from_json(const json& j, FlowParams defaults = {});

json event_to_json(const FlowEvent& e);
FlowEvent event_from_json(const json& j);

/// Full trace, snapshots included. All snapshots share the first
/// snapshot's manifold on the way back.
json trace_to_json(const FlowTrace& t);
FlowTrace trace_from_json(const json& j);

json checkpoint_to_json(const FlowCheckpoint& c, const FlowParams& p);
/// Returns the checkpoint and the parameters it was written with.
std::pair<FlowCheckpoint, FlowParams> checkpoint_from_json(const json& j);

// Report payloads. Scalars are {"value": x, "unit": u}; exact integers are
// decimal strings under "exact".
json quantity(double value, const char* unit);
json exact_quantity(const bounds::BigInt& value, const char* unit = "1");

json stationarity_to_json(const StationarityReport& r);
json oracle_to_json(const oracle::OracleResult& r, bool with_argmin = true);
json merging_to_json(const oracle::MergingReport& r);
json bounds_to_json(const bounds::BoundReport& r);
json compliance_to_json(const bounds::Compliance& c);

/// Write to `path` through a temporary sibling and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace geonet
