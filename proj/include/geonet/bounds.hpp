#pragma once

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "geonet/analysis.hpp"
#include "geonet/flow.hpp"

namespace geonet::bounds {

using BigInt = boost::multiprecision::cpp_int;

/// An angle given exactly as (numerator / denominator) * pi.
struct PiFraction {
  long numerator = 1;
  long denominator = 1;

  double radians() const;
};

/// max(ceil(1 / sin(eps/2)) + 1, 3). The double overload evaluates the sine
/// in 100-digit arithmetic and rounds the quotient upward before the
/// ceiling; it sees the double exactly, so pi/3 rounded to a double gives 4.
int a_of_epsilon(double epsilon);
/// Exact for rational multiples of pi (sin(eps/2) = 1/2 detected exactly).
int a_of_epsilon(PiFraction epsilon);

BigInt factorial(int n);
BigInt power(int base, int exponent);

/// An exact integer factor times a length scale.
struct ScaledBound {
  BigInt factor;
  double scale = 0.0;
  double value = 0.0;  // factor * scale, rounded once
};

/// 2 q! a^q d.
ScaledBound diameter_bound(int q, int a, double d);

struct RecurrenceStep {
  int k = 0;
  ScaledBound bound;
};

/// l_{q+1} = 2 d a^q, then l_k = k l_{k+1} down to l_2.
std::vector<RecurrenceStep> recurrence_trace(int q, int a, double d);

/// d (a^(q+1) - 1) / (a - 1): the edge-length sum that 2 d a^q rounds up.
ScaledBound initial_cage_length(int q, int a, double d);

struct FillRadBounds {
  double katz = 0.0;        // d / 3
  double gromov = 0.0;      // (n+1) n^n sqrt((n+1)!) vol^(1/n)
  double wenger = 0.0;      // 27^n (n+1)! vol^(1/n)
  double nabutovsky = 0.0;  // n vol^(1/n)
  double gromov_constant = 0.0;
  BigInt wenger_constant;
  int nabutovsky_constant = 0;
};
FillRadBounds fillrad_bounds(int n, double d, double vol);

/// Exact comparisons of the three volume constants.
struct ConstantOrdering {
  bool nabutovsky_le_wenger = false;
  bool wenger_le_gromov = false;  // 27^(2n) (n+1)! <= (n+1)^2 n^(2n)
};
ConstantOrdering fillrad_ordering(int n);
/// Smallest n with 27^n (n+1)! <= g(n).
int wenger_gromov_crossover();

struct VolumeLengthBound {
  BigInt fillrad_factor;      // 2 (n+1)!^2 a^((n+1)^3)
  BigInt volume_factor;       // n * fillrad_factor
  BigInt stated_volume_factor;  // 2 n (n+1)!^2 a^((n+1)^3) written directly
  /// 2 (n+2)! (n+1)! / 2^n * a^(sum_k ((k+2)(k+1)-2)/2), before rounding up;
  /// exact decimal (a fraction when 2^n does not divide).
  std::string unsimplified_factor;
  std::optional<double> via_fillrad;
  double via_volume = 0.0;
};
VolumeLengthBound volume_length_bound(int n, int a, double vol, std::optional<double> fillrad = std::nullopt);

struct PetalCount {
  int edges = 0;  // (n+2)(n+1)/2
  BigInt sum;     // 1 + a + ... + a^(edges-1)
  BigInt cap;     // a^((n+1)^2)
};
PetalCount max_petal_count(int n, int a);

struct BoundQuery {
  int n = 2;
  int q = 1;
  double epsilon = 0.0;
  std::optional<PiFraction> epsilon_exact;
  double diameter = 0.0;
  std::optional<double> volume;
  std::optional<double> fillrad;
  /// Weight base given directly; overrides the one derived from epsilon.
  std::optional<int> weight_base;

  /// Throws InvalidInput listing every violated constraint.
  void validate() const;
  int a() const;
};

struct BoundReport {
  int a = 0;
  ScaledBound diameter;
  std::vector<RecurrenceStep> recurrence;
  std::optional<FillRadBounds> fillrad;
  std::optional<VolumeLengthBound> volume;
  PetalCount petals;
};
BoundReport compute_bounds(const BoundQuery& query);

struct BoundCheck {
  std::string name;
  double bound = 0.0;
  double found = 0.0;
  bool passed = false;
  double margin = 0.0;  // bound / found
};

struct Compliance {
  bool critical_point_found = false;
  std::string note;
  std::optional<double> petal_length;
  double envelope_max = 0.0;
  std::vector<BoundCheck> checks;
  /// Empty when there was nothing to check.
  std::optional<bool> passed() const;
};

/// Compares the wide petal (the verdict's petal, else the top-exponent one)
/// and the trace's length envelope with the bounds of the query.
Compliance check_against_bounds(const StationarityReport& report, const FlowTrace& trace,
                                const BoundQuery& query);

}  // namespace geonet::bounds
