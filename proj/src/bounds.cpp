#include "geonet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "geonet/errors.hpp"

namespace geonet::bounds {

namespace mp = boost::multiprecision;
using Real = mp::cpp_bin_float_100;
using Rational = mp::cpp_rational;

double PiFraction::radians() const {
  return static_cast<double>(numerator) / static_cast<double>(denominator) * std::numbers::pi;
}

namespace {

int a_from_cosecant(const Real& cosecant) {
  // Upward margin far below any double-resolvable gap.
  const Real up = cosecant * (1 + Real("1e-90"));
  const int c = static_cast<int>(mp::ceil(up));
  return std::max(c + 1, 3);
}

ScaledBound scaled(BigInt factor, double scale) {
  ScaledBound b;
  b.value = static_cast<double>(factor) * scale;
  b.factor = std::move(factor);
  b.scale = scale;
  return b;
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

}  // namespace

int a_of_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < std::numbers::pi)) {
    throw InvalidInput("a_of_epsilon: epsilon must lie in (0, pi)");
  }
  const Real half = Real(epsilon) / 2;
  return a_from_cosecant(1 / mp::sin(half));
}

int a_of_epsilon(PiFraction epsilon) {
  long p = epsilon.numerator;
  long q = epsilon.denominator;
  if (q <= 0 || p <= 0 || p >= q) throw InvalidInput("a_of_epsilon: epsilon must lie in (0, pi)");
  // sin(r pi) with r = p / (2q) in (0, 1/2): rational only at r = 1/6.
  q *= 2;
  const long g = std::gcd(p, q);
  p /= g;
  q /= g;
  if (p == 1 && q == 6) return std::max(2 + 1, 3);
  const Real r = Real(p) / Real(q) * boost::math::constants::pi<Real>();
  return a_from_cosecant(1 / mp::sin(r));
}

BigInt factorial(int n) {
  if (n < 0) throw InvalidInput("factorial: negative argument");
  BigInt out = 1;
  for (int i = 2; i <= n; ++i) out *= i;
  return out;
}

BigInt power(int base, int exponent) {
  if (exponent < 0) throw InvalidInput("power: negative exponent");
  return mp::pow(BigInt(base), static_cast<unsigned>(exponent));
}

ScaledBound diameter_bound(int q, int a, double d) {
  require(q >= 1, "diameter_bound: q must be >= 1");
  require(a >= 3, "diameter_bound: a must be >= 3");
  require(d > 0.0, "diameter_bound: d must be positive");
  return scaled(2 * factorial(q) * power(a, q), d);
}

std::vector<RecurrenceStep> recurrence_trace(int q, int a, double d) {
  require(q >= 1, "recurrence_trace: q must be >= 1");
  require(a >= 3, "recurrence_trace: a must be >= 3");
  require(d > 0.0, "recurrence_trace: d must be positive");
  std::vector<RecurrenceStep> out;
  BigInt factor = 2 * power(a, q);
  out.push_back({q + 1, scaled(factor, d)});
  for (int k = q; k >= 2; --k) {
    factor *= k;
    out.push_back({k, scaled(factor, d)});
  }
  return out;
}

ScaledBound initial_cage_length(int q, int a, double d) {
  require(q >= 1 && a >= 2 && d > 0.0, "initial_cage_length: need q >= 1, a >= 2, d > 0");
  return scaled((power(a, q + 1) - 1) / (a - 1), d);
}

FillRadBounds fillrad_bounds(int n, double d, double vol) {
  require(n >= 1, "fillrad_bounds: n must be >= 1");
  require(d > 0.0 && vol > 0.0, "fillrad_bounds: d and vol must be positive");
  FillRadBounds b;
  const double root = std::pow(vol, 1.0 / n);
  const BigInt fact = factorial(n + 1);
  b.gromov_constant = static_cast<double>((n + 1) * power(n, n)) * std::sqrt(static_cast<double>(fact));
  b.wenger_constant = power(27, n) * fact;
  b.nabutovsky_constant = n;
  b.katz = d / 3.0;
  b.gromov = b.gromov_constant * root;
  b.wenger = static_cast<double>(b.wenger_constant) * root;
  b.nabutovsky = n * root;
  return b;
}

ConstantOrdering fillrad_ordering(int n) {
  require(n >= 1, "fillrad_ordering: n must be >= 1");
  ConstantOrdering o;
  const BigInt fact = factorial(n + 1);
  o.nabutovsky_le_wenger = BigInt(n) <= power(27, n) * fact;
  // Both sides squared: 27^(2n) (n+1)!^2 <= (n+1)^2 n^(2n) (n+1)!.
  o.wenger_le_gromov = power(27, 2 * n) * fact <= BigInt(n + 1) * (n + 1) * power(n, 2 * n);
  return o;
}

int wenger_gromov_crossover() {
  for (int n = 1; n < 10000; ++n) {
    if (fillrad_ordering(n).wenger_le_gromov) return n;
  }
  throw InternalError("wenger_gromov_crossover: no crossover below n = 10000");
}

VolumeLengthBound volume_length_bound(int n, int a, double vol, std::optional<double> fillrad) {
  require(n >= 1, "volume_length_bound: n must be >= 1");
  require(a >= 3, "volume_length_bound: a must be >= 3");
  require(vol > 0.0, "volume_length_bound: vol must be positive");
  if (fillrad) require(*fillrad > 0.0, "volume_length_bound: FillRad must be positive");
  VolumeLengthBound b;
  const BigInt f = factorial(n + 1);
  const int cube = (n + 1) * (n + 1) * (n + 1);
  b.fillrad_factor = 2 * f * f * power(a, cube);
  b.volume_factor = n * b.fillrad_factor;
  b.stated_volume_factor = 2 * BigInt(n) * f * f * power(a, cube);
  if (b.volume_factor != b.stated_volume_factor) {
    throw InternalError("volume_length_bound: factor forms disagree");
  }

  int e = 0;
  for (int k = 0; k <= n; ++k) e += ((k + 2) * (k + 1) - 2) / 2;
  const Rational raw = Rational(2 * factorial(n + 2) * f * power(a, e), power(2, n));
  if (raw > Rational(b.fillrad_factor)) {
    throw InternalError("volume_length_bound: unsimplified factor exceeds the rounded one");
  }
  b.unsimplified_factor = raw.str();

  if (fillrad) b.via_fillrad = static_cast<double>(b.fillrad_factor) * *fillrad;
  b.via_volume = static_cast<double>(b.volume_factor) * std::pow(vol, 1.0 / n);
  return b;
}

PetalCount max_petal_count(int n, int a) {
  require(n >= 0, "max_petal_count: n must be >= 0");
  require(a >= 2, "max_petal_count: a must be >= 2");
  PetalCount c;
  c.edges = (n + 2) * (n + 1) / 2;
  c.sum = (power(a, c.edges) - 1) / (a - 1);
  c.cap = power(a, (n + 1) * (n + 1));
  if (c.sum > c.cap) throw InternalError("max_petal_count: weighted edge count exceeds its cap");
  return c;
}

void BoundQuery::validate() const {
  std::vector<std::string> problems;
  if (n < 1) problems.push_back("n must be >= 1");
  if (q < 1) problems.push_back("q must be >= 1");
  if (q > n) problems.push_back("q must not exceed n");
  if (weight_base && *weight_base < 3) problems.push_back("weight base must be >= 3");
  if (epsilon_exact) {
    if (epsilon_exact->denominator <= 0 || epsilon_exact->numerator <= 0 ||
        epsilon_exact->numerator >= epsilon_exact->denominator) {
      problems.push_back("epsilon must lie in (0, pi)");
    }
  } else if ((!weight_base || epsilon != 0.0) && !(epsilon > 0.0 && epsilon < std::numbers::pi)) {
    problems.push_back("epsilon must lie in (0, pi)");
  }
  if (!(diameter > 0.0)) problems.push_back("diameter must be positive");
  if (volume && !(*volume > 0.0)) problems.push_back("volume must be positive");
  if (fillrad && !(*fillrad > 0.0)) problems.push_back("FillRad must be positive");
  if (problems.empty()) return;
  std::string msg = "invalid bound query:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw InvalidInput(msg);
}

int BoundQuery::a() const {
  if (weight_base) return *weight_base;
  return epsilon_exact ? a_of_epsilon(*epsilon_exact) : a_of_epsilon(epsilon);
}

BoundReport compute_bounds(const BoundQuery& query) {
  query.validate();
  BoundReport r;
  r.a = query.a();
  r.diameter = diameter_bound(query.q, r.a, query.diameter);
  r.recurrence = recurrence_trace(query.q, r.a, query.diameter);
  if (query.volume) {
    r.fillrad = fillrad_bounds(query.n, query.diameter, *query.volume);
    r.volume = volume_length_bound(query.n, r.a, *query.volume, query.fillrad);
  }
  r.petals = max_petal_count(query.n, r.a);
  return r;
}

std::optional<bool> Compliance::passed() const {
  if (checks.empty()) return std::nullopt;
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
}

Compliance check_against_bounds(const StationarityReport& report, const FlowTrace& trace,
                                const BoundQuery& query) {
  const BoundReport b = compute_bounds(query);
  Compliance c;
  if (!trace.lengths.empty()) c.envelope_max = length_envelope(trace).max;
  if (trace.status == TerminalStatus::CollapsedToPoint || report.net_class == NetClass::PointNet) {
    c.note = "no critical point found";
    return c;
  }
  if (trace.status != TerminalStatus::Converged) {
    c.note = "flow did not converge (" + to_string(trace.status) + ")";
    return c;
  }
  if (report.petals.empty()) {
    c.note = "terminal net is a " + to_string(report.net_class) + ", not a flower";
    return c;
  }
  c.critical_point_found = true;
  c.note = "critical point is a " + to_string(report.net_class);
  const Petal* wide = nullptr;
  for (const auto& p : report.petals) {
    if (report.verdict ? p.edge == report.verdict->petal : (!wide || p.exponent > wide->exponent)) wide = &p;
  }
  if (!wide) throw InvalidInput("check_against_bounds: verdict names a petal the report does not list");
  c.petal_length = wide->length;

  auto add = [&](std::string name, double bound, double found) {
    c.checks.push_back({std::move(name), bound, found, found <= bound, found > 0.0 ? bound / found : 0.0});
  };
  add("diameter: wide petal", b.diameter.value, wide->length);
  add("diameter: length envelope", b.diameter.value, c.envelope_max);
  if (b.volume) {
    add("volume: wide petal", b.volume->via_volume, wide->length);
    if (b.volume->via_fillrad) add("fillrad: wide petal", *b.volume->via_fillrad, wide->length);
  }
  return c;
}

}  // namespace geonet::bounds
