#pragma once

#include <span>

#include "geonet/manifold.hpp"

namespace geonet {

double polyline_length(const Manifold& m, std::span<const Point> pts);

/// Unit tangent at the front (or back) of a polyline pointing into it; zero
/// when the first (last) segment is degenerate.
Vec3 front_tangent(const Manifold& m, std::span<const Point> pts);
Vec3 back_tangent(const Manifold& m, std::span<const Point> pts);

/// Sum of the tangent-plane turning angles at interior points: a discrete
/// total geodesic curvature, zero for an exact discrete geodesic.
double geodesic_turning(const Manifold& m, std::span<const Point> pts);

struct SweepStats {
  double length_before = 0.0;
  double length_after = 0.0;
  double max_displacement = 0.0;
  double max_lateral = 0.0;  // part of the largest move across the curve
  int accepted = 0;
};

/// One multilevel Gauss-Seidel midpoint sweep with fixed endpoints.
///
/// Coarse levels move every s-th point toward the midpoint of its neighbours
/// at stride s and drag the points in between with a hat-shaped weight; the
/// finest level is plain midpoint replacement. A move is kept only if it
/// shortens its window, so the polyline length never increases.
SweepStats relax_sweep(const Manifold& m, Polyline& pts, double span_limit);

/// Insert geodesic midpoints until every gap is at most `spacing`; drop
/// interior points whose two adjacent gaps add up to less than spacing / 2.
void resample(const Manifold& m, Polyline& pts, double spacing);

/// Rebuild with `segments` equal-arclength pieces (used to coarsen seeds).
Polyline resample_uniform(const Manifold& m, std::span<const Point> pts, int segments);

struct RelaxOutcome {
  int sweeps = 0;
  bool converged = false;
  double length = 0.0;
};

/// Sweep until the largest accepted move across the curve drops below
/// `displacement_tol`.
RelaxOutcome relax_until_converged(const Manifold& m, Polyline& pts, double displacement_tol,
                                   int max_sweeps);

/// Newton iteration on the lateral offsets of the interior points so that
/// each sits at the midpoint of its neighbours. The tridiagonal Jacobian is
/// built by finite differences; steps that do not reduce the residual are
/// halved, and an iteration that cannot make progress returns unconverged.
/// Needs a starting polyline already close to a geodesic.
RelaxOutcome newton_polish(const Manifold& m, Polyline& pts, double tol, int max_iterations);

}  // namespace geonet
