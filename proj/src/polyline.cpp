#include "geonet/polyline.hpp"

#include <algorithm>
#include <cmath>

namespace geonet {

double polyline_length(const Manifold& m, std::span<const Point> pts) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += m.step_distance(pts[i], pts[i + 1]);
  return sum;
}

namespace {

Vec3 end_direction(const Manifold& m, const Point& at, const Point& next) {
  const Vec3 t = m.tangent_project(at, m.chord(at, next));
  const double n = t.norm();
  return n > 0.0 ? Vec3(t / n) : Vec3::Zero();
}

}  // namespace

Vec3 front_tangent(const Manifold& m, std::span<const Point> pts) {
  if (pts.size() < 2) return Vec3::Zero();
  return end_direction(m, pts[0], pts[1]);
}

Vec3 back_tangent(const Manifold& m, std::span<const Point> pts) {
  if (pts.size() < 2) return Vec3::Zero();
  return end_direction(m, pts[pts.size() - 1], pts[pts.size() - 2]);
}

double geodesic_turning(const Manifold& m, std::span<const Point> pts) {
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec3 in = m.tangent_project(pts[i], m.chord(pts[i - 1], pts[i]));
    const Vec3 out = m.tangent_project(pts[i], m.chord(pts[i], pts[i + 1]));
    if (in.norm() == 0.0 || out.norm() == 0.0) continue;
    total += std::atan2(in.cross(out).norm(), in.dot(out));
  }
  return total;
}

SweepStats relax_sweep(const Manifold& m, Polyline& pts, double span_limit) {
  SweepStats stats;
  const std::size_t n = pts.size();
  stats.length_before = polyline_length(m, pts);
  stats.length_after = stats.length_before;
  if (n < 3) return stats;

  const std::size_t last = n - 1;
  const double mean_gap = stats.length_before / static_cast<double>(last);
  std::size_t top = 1;
  while (4 * top <= last && 4.0 * static_cast<double>(top) * mean_gap <= span_limit) top *= 2;

  Polyline window;
  for (std::size_t s = top; s >= 1; s /= 2) {
    for (std::size_t i = s; i + s <= last; i += s) {
      const Point target = m.midpoint(pts[i - s], pts[i + s]);
      const Vec3 delta = m.chord(pts[i], target);
      const double move = delta.norm();
      if (move == 0.0) continue;
      // Component across the local direction of the curve; sliding along it
      // only redistributes points.
      const Vec3 along = m.chord(pts[i - s], pts[i + s]);
      const double an = along.norm();
      const double lateral = an > 0.0 ? (delta - (delta.dot(along) / (an * an)) * along).norm() : move;
      if (s == 1) {
        const double before = m.step_distance(pts[i - 1], pts[i]) + m.step_distance(pts[i], pts[i + 1]);
        const double after = m.step_distance(pts[i - 1], target) + m.step_distance(target, pts[i + 1]);
        if (after < before) {
          pts[i] = target;
          stats.max_displacement = std::max(stats.max_displacement, move);
          stats.max_lateral = std::max(stats.max_lateral, lateral);
          ++stats.accepted;
        }
        continue;
      }
      // Hat-weighted drag of the interior of [i - s, i + s].
      window.assign(2 * s + 1, Point::Zero());
      window.front() = pts[i - s];
      window.back() = pts[i + s];
      for (std::size_t k = 1; k < 2 * s; ++k) {
        const std::size_t j = i - s + k;
        const double w = 1.0 - std::abs(static_cast<double>(k) - static_cast<double>(s)) / static_cast<double>(s);
        window[k] = m.retract(pts[j], w * delta);
      }
      double before = 0.0;
      double after = 0.0;
      for (std::size_t k = 0; k < 2 * s; ++k) {
        before += m.step_distance(pts[i - s + k], pts[i - s + k + 1]);
        after += m.step_distance(window[k], window[k + 1]);
      }
      if (after < before) {
        for (std::size_t k = 1; k < 2 * s; ++k) pts[i - s + k] = window[k];
        stats.max_displacement = std::max(stats.max_displacement, move);
        stats.max_lateral = std::max(stats.max_lateral, lateral);
        ++stats.accepted;
      }
    }
    if (s == 1) break;
  }
  stats.length_after = stats.accepted > 0 ? polyline_length(m, pts) : stats.length_before;
  return stats;
}

void resample(const Manifold& m, Polyline& pts, double spacing) {
  if (pts.size() < 2) return;
  Polyline out;
  out.reserve(pts.size());
  out.push_back(pts.front());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Point& next = pts[i];
    // Drop an interior point sitting in a cluster.
    if (i + 1 < pts.size() && out.size() >= 1) {
      const double gap_in = m.step_distance(out.back(), next);
      const double gap_out = m.step_distance(next, pts[i + 1]);
      if (gap_in + gap_out < 0.5 * spacing) continue;
    }
    // Bisect overlong gaps.
    const double gap = m.step_distance(out.back(), next);
    if (gap > spacing) {
      int pieces = 1;
      while (gap / pieces > spacing) pieces *= 2;
      std::vector<Point> inner{out.back(), next};
      while (static_cast<int>(inner.size()) - 1 < pieces) {
        std::vector<Point> finer;
        finer.reserve(inner.size() * 2);
        for (std::size_t k = 0; k + 1 < inner.size(); ++k) {
          finer.push_back(inner[k]);
          finer.push_back(m.midpoint(inner[k], inner[k + 1]));
        }
        finer.push_back(inner.back());
        inner.swap(finer);
      }
      out.insert(out.end(), inner.begin() + 1, inner.end() - 1);
    }
    out.push_back(next);
  }
  pts.swap(out);
}

Polyline resample_uniform(const Manifold& m, std::span<const Point> pts, int segments) {
  Polyline out;
  if (pts.empty()) return out;
  if (pts.size() == 1 || segments < 1) return Polyline(pts.begin(), pts.end());
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + m.step_distance(pts[i - 1], pts[i]);
  const double total = cum.back();
  out.reserve(static_cast<std::size_t>(segments) + 1);
  out.push_back(pts.front());
  std::size_t j = 0;
  for (int k = 1; k < segments; ++k) {
    const double target = total * k / segments;
    while (j + 2 < pts.size() && cum[j + 1] < target) ++j;
    const double span = cum[j + 1] - cum[j];
    const double t = span > 0.0 ? std::clamp((target - cum[j]) / span, 0.0, 1.0) : 0.0;
    out.push_back(m.retract(pts[j], t * m.chord(pts[j], pts[j + 1])));
  }
  out.push_back(pts.back());
  return out;
}

RelaxOutcome relax_until_converged(const Manifold& m, Polyline& pts, double displacement_tol,
                                   int max_sweeps) {
  RelaxOutcome out;
  const double span = m.coarse_span_limit();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const SweepStats s = relax_sweep(m, pts, span);
    out.sweeps = sweep + 1;
    out.length = s.length_after;
    if (s.max_lateral <= displacement_tol) {
      out.converged = true;
      return out;
    }
  }
  out.length = polyline_length(m, pts);
  return out;
}

namespace {

// Lateral unit directions (in the tangent plane, across the curve).
std::vector<Vec3> lateral_frames(const Manifold& m, const Polyline& pts) {
  std::vector<Vec3> out(pts.size(), Vec3::Zero());
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec3 d = m.tangent_project(pts[i], m.chord(pts[i - 1], pts[i + 1]));
    const Vec3 n = m.unit_normal(pts[i]).cross(d);
    const double nn = n.norm();
    if (nn > 0.0) out[i] = n / nn;
  }
  return out;
}

void lateral_residual(const Manifold& m, const Polyline& pts, const std::vector<Vec3>& frame,
                      std::vector<double>& r) {
  r.assign(pts.size(), 0.0);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    r[i] = frame[i].dot(m.chord(pts[i], m.midpoint(pts[i - 1], pts[i + 1])));
  }
}

double rms(const std::vector<double>& v) {
  double out = 0.0;
  for (const double x : v) out += x * x;
  return std::sqrt(out / static_cast<double>(std::max<std::size_t>(1, v.size())));
}

// Solves (J - mu I) delta = -r over the interior unknowns 1..n-2, where J is
// tridiagonal with the given bands. The diagonal of J is negative near a
// minimizer, so the shift pushes it away from zero.
bool solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                       const std::vector<double>& upper, const std::vector<double>& r, double mu,
                       std::vector<double>& delta) {
  const std::size_t n = r.size();
  std::vector<double> cprime(n, 0.0), dprime(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double l = i > 1 ? lower[i] : 0.0;
    const double den = diag[i] - mu - l * cprime[i - 1];
    if (!(std::abs(den) > 1e-12)) return false;
    cprime[i] = i + 2 < n ? upper[i] / den : 0.0;
    dprime[i] = (-r[i] - l * dprime[i - 1]) / den;
  }
  delta.assign(n, 0.0);
  for (std::size_t i = n - 2; i >= 1; --i) {
    delta[i] = dprime[i] - (i + 2 < n ? cprime[i] * delta[i + 1] : 0.0);
  }
  return true;
}

double max_abs(const std::vector<double>& v) {
  double out = 0.0;
  for (const double x : v) out = std::max(out, std::abs(x));
  return out;
}

}  // namespace

RelaxOutcome newton_polish(const Manifold& m, Polyline& pts, double tol, int max_iterations) {
  RelaxOutcome out;
  const std::size_t n = pts.size();
  if (n < 3) {
    out.converged = true;
    out.length = polyline_length(m, pts);
    return out;
  }
  const double length = polyline_length(m, pts);
  const double gap = length / static_cast<double>(n - 1);
  const double eps = 1e-7 * std::max(gap, 1e-3 * m.min_shape_parameter());

  std::vector<double> r, rp, lower(n), diag(n), upper(n), delta(n);
  Polyline trial(n);
  for (int it = 0; it < max_iterations; ++it) {
    out.sweeps = it + 1;
    const std::vector<Vec3> frame = lateral_frames(m, pts);
    lateral_residual(m, pts, frame, r);
    const double res0 = max_abs(r);
    if (res0 <= tol) {
      out.converged = true;
      break;
    }
    // Three colours: every point's stencil meets each colour once.
    for (std::size_t c = 0; c < 3; ++c) {
      trial = pts;
      for (std::size_t j = 1; j + 1 < n; ++j) {
        if (j % 3 == c) trial[j] = m.retract(pts[j], eps * frame[j]);
      }
      lateral_residual(m, trial, frame, rp);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = (rp[i] - r[i]) / eps;
        if ((i - 1) % 3 == c) lower[i] = d;
        if (i % 3 == c) diag[i] = d;
        if ((i + 1) % 3 == c) upper[i] = d;
      }
    }
    // Newton step first, then increasingly damped (Levenberg-Marquardt)
    // steps; near conjugate points the plain step is ill-conditioned.
    const double rms0 = rms(r);
    bool improved = false;
    for (const double mu : {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      if (!solve_tridiagonal(lower, diag, upper, r, mu, delta)) continue;
      if (max_abs(delta) > 0.25 * gap) continue;
      for (std::size_t j = 1; j + 1 < n; ++j) trial[j] = m.retract(pts[j], delta[j] * frame[j]);
      trial.front() = pts.front();
      trial.back() = pts.back();
      lateral_residual(m, trial, lateral_frames(m, trial), rp);
      if (rms(rp) < rms0) {
        pts.swap(trial);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!out.converged) {
    lateral_residual(m, pts, lateral_frames(m, pts), r);
    out.converged = max_abs(r) <= tol;
  }
  out.length = polyline_length(m, pts);
  return out;
}

}  // namespace geonet
