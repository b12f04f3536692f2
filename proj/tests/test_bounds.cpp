#include <cmath>
#include <numbers>

#include "doctest.h"
#include "geonet/bounds.hpp"
#include "geonet/errors.hpp"

using namespace geonet;
using namespace geonet::bounds;
using std::numbers::pi;

namespace {

unsigned __int128 ipow(unsigned __int128 b, int e) {
  unsigned __int128 out = 1;
  while (e-- > 0) out *= b;
  return out;
}

std::string to_decimal(unsigned __int128 x) {
  if (x == 0) return "0";
  std::string s;
  while (x > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(x % 10)));
    x /= 10;
  }
  return s;
}

// Log-space comparison of 27^n (n+1)! against (n+1) n^n sqrt((n+1)!).
bool wenger_below_gromov_approx(int n) {
  const long double lhs = n * std::log(27.0L) + std::lgamma(n + 2.0L);
  const long double rhs = std::log(n + 1.0L) + n * std::log(static_cast<long double>(n)) + 0.5L * std::lgamma(n + 2.0L);
  return lhs <= rhs;
}

FlowTrace converged_trace(double length) {
  FlowTrace t;
  t.status = TerminalStatus::Converged;
  t.lengths = {{0, length}, {1, length}};
  return t;
}

StationarityReport flower_report(double petal_length) {
  StationarityReport r;
  r.net_class = NetClass::PeriodicGeodesic;
  r.petals = {{0, 0, petal_length, pi}};
  return r;
}

}  // namespace

TEST_CASE("a_of_epsilon") {
  CHECK(a_of_epsilon(PiFraction{1, 3}) == 3);
  CHECK(a_of_epsilon(PiFraction{2, 6}) == 3);
  // The nearest double to pi/3 sits just below it: sin(eps/2) < 1/2.
  CHECK(std::sin(pi / 6) < 0.5);
  CHECK(a_of_epsilon(pi / 3) == 4);
  CHECK(a_of_epsilon(0.1) == 22);
  CHECK(1.0 / std::sin(0.05) == doctest::Approx(20.008).epsilon(1e-4));
  CHECK(a_of_epsilon(3.0) == 3);
  CHECK(a_of_epsilon(PiFraction{9, 10}) == 3);
  CHECK(a_of_epsilon(PiFraction{1, 2}) == 3);
  // ceil(1 / sin(pi / 20)) + 1 = ceil(6.39) + 1.
  CHECK(a_of_epsilon(PiFraction{1, 10}) == 8);
  for (double eps : {0.01, 0.05, 0.3, 0.77, 1.3, 2.2}) {
    const long double csc = 1.0L / std::sin(static_cast<long double>(eps) / 2.0L);
    CHECK(a_of_epsilon(eps) == std::max(3, static_cast<int>(std::ceil(csc)) + 1));
  }
  CHECK_THROWS_AS(a_of_epsilon(0.0), InvalidInput);
  CHECK_THROWS_AS(a_of_epsilon(pi), InvalidInput);
  CHECK_THROWS_AS(a_of_epsilon(PiFraction{3, 3}), InvalidInput);
  CHECK_THROWS_AS(a_of_epsilon(PiFraction{1, 0}), InvalidInput);
}

TEST_CASE("diameter_bound") {
  const auto b = diameter_bound(2, 3, pi);
  CHECK(b.factor == 36);
  CHECK(b.value == doctest::Approx(36 * pi).epsilon(1e-14));
  CHECK(b.value == doctest::Approx(113.097).epsilon(1e-5));
  CHECK(diameter_bound(1, 3, 1.0).value == 6.0);
  CHECK(diameter_bound(3, 3, 1.0).value == 324.0);
  CHECK(diameter_bound(20, 9, 1.0).factor.str() == to_decimal(2 * 2432902008176640000ULL * ipow(9, 20)));
  CHECK_THROWS_AS(diameter_bound(0, 3, 1.0), InvalidInput);
  CHECK_THROWS_AS(diameter_bound(2, 2, 1.0), InvalidInput);
  CHECK_THROWS_AS(diameter_bound(2, 3, 0.0), InvalidInput);
}

TEST_CASE("diameter_bound increases in every argument") {
  for (int q = 1; q <= 5; ++q) {
    for (int a = 3; a <= 6; ++a) {
      const double v = diameter_bound(q, a, 1.5).value;
      CHECK(diameter_bound(q + 1, a, 1.5).value > v);
      CHECK(diameter_bound(q, a + 1, 1.5).value > v);
      CHECK(diameter_bound(q, a, 1.6).value > v);
    }
  }
}

TEST_CASE("recurrence_trace") {
  const auto t = recurrence_trace(2, 3, 1.0);
  REQUIRE(t.size() == 2);
  CHECK(t[0].k == 3);
  CHECK(t[0].bound.factor == 18);
  CHECK(t[1].k == 2);
  CHECK(t[1].bound.factor == 36);

  const auto single = recurrence_trace(1, 5, 2.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].k == 2);
  CHECK(single[0].bound.factor == diameter_bound(1, 5, 2.0).factor);

  const auto three = recurrence_trace(3, 3, 1.0);
  REQUIRE(three.size() == 3);
  CHECK(three[0].bound.factor == 54);
  CHECK(three[1].bound.factor == 162);
  CHECK(three[2].bound.factor == 324);

  for (int q = 1; q <= 12; ++q) {
    for (int a : {3, 4, 7}) {
      const auto tr = recurrence_trace(q, a, 0.7);
      CHECK(tr.back().bound.factor == diameter_bound(q, a, 0.7).factor);
      CHECK(tr.back().bound.value == diameter_bound(q, a, 0.7).value);
      CHECK(initial_cage_length(q, a, 0.7).factor <= tr.front().bound.factor);
    }
  }
}

TEST_CASE("fillrad_bounds") {
  const auto b = fillrad_bounds(2, pi, 4 * pi);
  CHECK(b.katz == doctest::Approx(pi / 3).epsilon(1e-14));
  CHECK(b.katz == doctest::Approx(1.047).epsilon(1e-3));
  CHECK(b.nabutovsky == doctest::Approx(2 * std::sqrt(4 * pi)).epsilon(1e-14));
  CHECK(b.nabutovsky == doctest::Approx(7.090).epsilon(1e-4));
  CHECK(b.gromov_constant == doctest::Approx(12 * std::sqrt(6.0)).epsilon(1e-14));
  CHECK(b.gromov_constant == doctest::Approx(29.394).epsilon(1e-4));
  CHECK(b.wenger_constant == 27 * 27 * 6);
  CHECK(fillrad_bounds(1, 1.0, 2.5).nabutovsky == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(fillrad_bounds(2, 1.0, -1.0), InvalidInput);
}

TEST_CASE("fillrad constant ordering") {
  for (int n = 1; n <= 60; ++n) {
    const auto o = fillrad_ordering(n);
    CHECK(o.nabutovsky_le_wenger);
    CHECK(o.wenger_le_gromov == wenger_below_gromov_approx(n));
  }
  const int cross = wenger_gromov_crossover();
  CHECK(cross > 2);
  CHECK_FALSE(fillrad_ordering(cross - 1).wenger_le_gromov);
  CHECK(fillrad_ordering(cross).wenger_le_gromov);
  CHECK(wenger_below_gromov_approx(cross));
  CHECK_FALSE(wenger_below_gromov_approx(cross - 1));
}

TEST_CASE("volume_length_bound") {
  const auto b = volume_length_bound(2, 3, 4 * pi);
  CHECK(to_decimal(ipow(3, 27)) == "7625597484987");
  CHECK(b.fillrad_factor.str() == to_decimal(2 * 36 * ipow(3, 27)));
  CHECK(b.fillrad_factor.str() == "549043018919064");
  CHECK(b.volume_factor.str() == "1098086037838128");
  CHECK(b.stated_volume_factor == b.volume_factor);
  CHECK_FALSE(b.via_fillrad.has_value());
  CHECK(b.via_volume == doctest::Approx(1098086037838128.0 * std::sqrt(4 * pi)).epsilon(1e-12));
  CHECK(b.unsimplified_factor == to_decimal(2 * 24 * 6 / 4 * ipow(3, 7)));

  CHECK(volume_length_bound(1, 3, 1.0).fillrad_factor == 52488);
  const auto with = volume_length_bound(2, 3, 4 * pi, pi / 3);
  REQUIRE(with.via_fillrad.has_value());
  CHECK(*with.via_fillrad == doctest::Approx(549043018919064.0 * pi / 3).epsilon(1e-12));

  for (int n = 1; n <= 3; ++n) {
    for (int a = 3; a <= 5; ++a) {
      const auto v = volume_length_bound(n, a, 2.0);
      CHECK(volume_length_bound(n + 1, a, 2.0).volume_factor > v.volume_factor);
      CHECK(volume_length_bound(n, a + 1, 2.0).volume_factor > v.volume_factor);
    }
  }
  CHECK_THROWS_AS(volume_length_bound(2, 2, 1.0), InvalidInput);
}

TEST_CASE("max_petal_count") {
  const auto one = max_petal_count(1, 3);
  CHECK(one.edges == 3);
  CHECK(one.sum == 13);
  CHECK(one.cap == 81);
  const auto two = max_petal_count(2, 3);
  CHECK(two.edges == 6);
  CHECK(two.sum == 364);
  CHECK(two.cap == 19683);
  const auto zero = max_petal_count(0, 3);
  CHECK(zero.edges == 1);
  CHECK(zero.sum == 1);
  CHECK(zero.cap == 3);
  for (int n = 0; n <= 6; ++n) {
    for (int a = 2; a <= 7; ++a) {
      const auto c = max_petal_count(n, a);
      unsigned __int128 s = 0;
      for (int j = 0; j < c.edges && n <= 3; ++j) s += ipow(static_cast<unsigned>(a), j);
      if (n <= 3) CHECK(c.sum.str() == to_decimal(s));
      CHECK(c.sum <= c.cap);
    }
  }
}

TEST_CASE("compute_bounds and query validation") {
  BoundQuery q;
  q.n = 2;
  q.q = 2;
  q.epsilon_exact = PiFraction{1, 3};
  q.diameter = pi;
  q.volume = 4 * pi;
  const auto r = compute_bounds(q);
  CHECK(r.a == 3);
  CHECK(r.diameter.factor == 36);
  CHECK(r.recurrence.back().bound.factor == 36);
  REQUIRE(r.volume.has_value());
  CHECK(r.volume->fillrad_factor.str() == "549043018919064");
  CHECK(r.petals.sum == 364);

  BoundQuery bad;
  bad.n = 1;
  bad.q = 2;
  bad.epsilon = 4.0;
  bad.diameter = -1.0;
  try {
    bad.validate();
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    CHECK(msg.find("q must not exceed n") != std::string::npos);
    CHECK(msg.find("epsilon") != std::string::npos);
    CHECK(msg.find("diameter") != std::string::npos);
  }
}

TEST_CASE("check_against_bounds") {
  BoundQuery q;
  q.n = 2;
  q.q = 2;
  q.epsilon_exact = PiFraction{1, 3};
  q.diameter = pi;

  const auto ok = check_against_bounds(flower_report(2 * pi), converged_trace(2 * pi), q);
  CHECK(ok.critical_point_found);
  REQUIRE(ok.passed().has_value());
  CHECK(*ok.passed());
  REQUIRE(!ok.checks.empty());
  CHECK(ok.checks[0].bound == doctest::Approx(36 * pi));
  CHECK(ok.checks[0].margin == doctest::Approx(18.0));

  const auto longer = check_against_bounds(flower_report(200.0), converged_trace(200.0), q);
  REQUIRE(longer.passed().has_value());
  CHECK_FALSE(*longer.passed());

  FlowTrace collapsed;
  collapsed.status = TerminalStatus::CollapsedToPoint;
  collapsed.lengths = {{0, 5.0}, {1, 0.0}};
  StationarityReport point;
  point.net_class = NetClass::PointNet;
  const auto none = check_against_bounds(point, collapsed, q);
  CHECK_FALSE(none.critical_point_found);
  CHECK(none.note == "no critical point found");
  CHECK_FALSE(none.passed().has_value());
  CHECK(none.envelope_max == 5.0);
}
