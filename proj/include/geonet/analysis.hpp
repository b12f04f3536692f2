#pragma once

#include <optional>
#include <vector>

#include "geonet/flow.hpp"
#include "geonet/net.hpp"

namespace geonet {

/// Per-vertex weighted sum of unit tangents pointing away from the vertex.
std::vector<Vec3> stationarity_residual(const Net& net, int a);

/// PointNet, PeriodicGeodesic, Flower, Cage or General. A single nontrivial
/// loop counts as a periodic geodesic when its angle is within
/// sigma / a^max_exponent of pi.
NetClass classify(const Net& net, const FlowParams& p);

struct Petal {
  int edge = -1;
  int exponent = 0;
  double length = 0.0;
  double angle = 0.0;  // between the two tangents pointing into the loop
};

/// Nontrivial loops at the single vertex of a flower. Throws InvalidState
/// for nets with more than one vertex.
std::vector<Petal> petal_angles(const Net& net);

struct WideLoopVerdict {
  int petal = -1;               // edge index of the top-weight nontrivial petal
  int exponent = 0;
  double angle = 0.0;
  double angle_defect = 0.0;    // pi - angle
  double lhs = 0.0;             // sin(angle_defect / 2)
  double bound = 0.0;           // 1 / (a - 1)
  double slack = 0.0;
  double epsilon = 0.0;
  bool within_epsilon = false;  // angle_defect < epsilon
  bool bound_below_epsilon = false;  // 1/(a-1) <= sin(epsilon/2)
  bool passed = false;          // lhs <= bound + slack
};

struct StationarityReport {
  std::vector<Vec3> residuals;
  std::vector<double> residual_norms;
  double max_residual = 0.0;
  double sigma = 0.0;
  NetClass net_class = NetClass::General;
  std::vector<Petal> petals;
  std::optional<WideLoopVerdict> verdict;
};

StationarityReport analyze(const Net& net, const FlowParams& p);

/// Checks sin((pi - theta_s)/2) <= 1/(a-1) + sigma / (2 a^s) on the
/// top-exponent nontrivial petal s. The slack is the residual allowance
/// divided through by the top weight, so an exact critical point gets none.
/// Throws InvalidState without a nontrivial petal or when the net is not a
/// flower.
WideLoopVerdict wide_loop_verdict(const StationarityReport& report, int a, double epsilon);

}  // namespace geonet
