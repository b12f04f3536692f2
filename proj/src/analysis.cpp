#include "geonet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geonet/errors.hpp"
#include "geonet/polyline.hpp"

namespace geonet {

std::vector<Vec3> stationarity_residual(const Net& net, int a) {
  return vertex_residuals(net, static_cast<double>(a));
}

std::vector<Petal> petal_angles(const Net& net) {
  if (net.vertices.size() != 1) {
    throw InvalidState("petal_angles: net has " + std::to_string(net.vertices.size()) +
                       " vertices, a flower has one");
  }
  const Manifold& m = *net.manifold;
  const Point& base = net.vertices.front();
  std::vector<Petal> out;
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    if (e.trivial()) continue;
    const Vec3 u = front_tangent(m, e.polyline);
    const Vec3 v = back_tangent(m, e.polyline);
    double angle = 0.0;
    if (u.norm() > 0.0 && v.norm() > 0.0) angle = angle_between(m, {base, u}, {base, v});
    out.push_back({static_cast<int>(i), e.exponent, polyline_length(m, e.polyline), angle});
  }
  return out;
}

NetClass classify(const Net& net, const FlowParams& p) {
  const auto nontrivial = std::count_if(net.edges.begin(), net.edges.end(),
                                        [](const WeightedEdge& e) { return !e.trivial(); });
  if (net.vertices.size() == 2) return NetClass::Cage;
  if (net.vertices.size() != 1) return NetClass::General;
  if (nontrivial == 0) return NetClass::PointNet;
  if (nontrivial == 1) {
    const Petal petal = petal_angles(net).front();
    const double tol = p.sigma / std::pow(static_cast<double>(p.a), std::max(0, net.max_exponent()));
    if (std::numbers::pi - petal.angle <= tol) return NetClass::PeriodicGeodesic;
  }
  return NetClass::Flower;
}

StationarityReport analyze(const Net& net, const FlowParams& p) {
  StationarityReport r;
  r.residuals = stationarity_residual(net, p.a);
  for (const auto& v : r.residuals) {
    r.residual_norms.push_back(v.norm());
    r.max_residual = std::max(r.max_residual, v.norm());
  }
  r.sigma = p.sigma;
  r.net_class = classify(net, p);
  if (net.vertices.size() == 1) r.petals = petal_angles(net);
  return r;
}

WideLoopVerdict wide_loop_verdict(const StationarityReport& report, int a, double epsilon) {
  if (a < 2) throw InvalidInput("wide_loop_verdict: a must be >= 2");
  if (report.net_class != NetClass::Flower && report.net_class != NetClass::PeriodicGeodesic) {
    throw InvalidState("wide_loop_verdict: net is a " + to_string(report.net_class) + ", not a flower");
  }
  if (report.petals.empty()) throw InvalidState("wide_loop_verdict: flower has no nontrivial petal");
  const Petal& top = *std::max_element(report.petals.begin(), report.petals.end(),
                                       [](const Petal& x, const Petal& y) { return x.exponent < y.exponent; });
  WideLoopVerdict v;
  v.petal = top.edge;
  v.exponent = top.exponent;
  v.angle = top.angle;
  v.angle_defect = std::numbers::pi - top.angle;
  v.lhs = std::sin(0.5 * v.angle_defect);
  v.bound = 1.0 / (a - 1);
  v.slack = report.sigma / (2.0 * std::pow(static_cast<double>(a), top.exponent)) + 1e-12;
  v.epsilon = epsilon;
  v.within_epsilon = v.angle_defect < epsilon;
  v.bound_below_epsilon = v.bound <= std::sin(0.5 * epsilon) + 1e-12;
  v.passed = v.lhs <= v.bound + v.slack;
  return v;
}

}  // namespace geonet
