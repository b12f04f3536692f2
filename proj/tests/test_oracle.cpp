#include <cmath>
#include <numbers>

#include "doctest.h"
#include "geonet/errors.hpp"
#include "geonet/oracle.hpp"

using namespace geonet;
using namespace geonet::oracle;
using std::numbers::pi;

namespace {

// Independent evaluation of max weight minus the rest for 1, a, ..., a^(k-1).
double cage_gap(int k, int a) {
  long top = 1;
  for (int i = 1; i < k; ++i) top *= a;
  long rest = 0;
  for (long w = 1; w < top; w *= a) rest += w;
  return static_cast<double>(top - rest);
}

}  // namespace

TEST_CASE("min_cage_residual: small cases") {
  const auto r = min_cage_residual(3, 3, 3);
  CHECK(r.minimized == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(r.predicted == 5.0);
  CHECK(r.converged);
  CHECK(r.restarts == kDefaultRestarts);

  const auto two = min_cage_residual(2, 3, 2);
  CHECK(two.minimized == doctest::Approx(2.0).epsilon(1e-9));
  // Argmin: the two vectors antiparallel.
  CHECK(two.argmin.vectors[0].dot(two.argmin.vectors[1]) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("min_exponent_residual: equal weights cancel") {
  const auto r = min_exponent_residual({0, 0, 0}, 3, 2, 16);
  CHECK(r.predicted == 0.0);
  CHECK(r.minimized < 1e-9);
  // Mercedes: pairwise angles of 2 pi / 3.
  const auto& v = r.argmin.vectors;
  CHECK(v[0].dot(v[1]) == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(v[1].dot(v[2]) == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("min_cage_residual: below the weight threshold") {
  // Weights 1, 2, 4: the top still exceeds the rest by exactly one.
  const auto r = min_cage_residual(3, 2, 3);
  CHECK(r.predicted == 1.0);
  CHECK(r.minimized == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(dominance_margin({0, 1, 2}, 2) == "1");
  // With a = 1 the weights balance.
  CHECK(min_exponent_residual({0, 1, 2}, 1, 3, 16).minimized < 1e-9);
}

TEST_CASE("min_cage_residual agrees with the closed form") {
  for (int k = 2; k <= 5; ++k) {
    for (int a : {3, 4}) {
      for (int n : {2, 7}) {
        const auto r = min_cage_residual(k, a, n, 32, 9);
        CHECK(r.minimized == doctest::Approx(cage_gap(k, a)).epsilon(1e-9));
        CHECK(r.minimized >= cage_gap(k, a) - 1e-6);
        CHECK(r.predicted == cage_gap(k, a));
      }
    }
  }
}

TEST_CASE("min_cage_residual: dimension independence and growth in a") {
  for (int k = 2; k <= 4; ++k) {
    const double low = min_cage_residual(k, 3, 2, 16).minimized;
    CHECK(low == doctest::Approx(min_cage_residual(k, 3, 7, 16).minimized).epsilon(1e-9));
    CHECK(min_cage_residual(k, 4, 3, 16).minimized > low);
    CHECK(min_cage_residual(k, 5, 3, 16).minimized > min_cage_residual(k, 4, 3, 16).minimized);
  }
}

TEST_CASE("min_flower_residual") {
  // Closed top petal: balances with or without lower petals.
  const auto closed = min_flower_residual(2, 3, pi, 3);
  CHECK(closed.minimized < 1e-9);
  const auto alone = min_partial_flower_residual(2, 3, pi, {}, 3);
  CHECK(alone.minimized == 0.0);
  CHECK(flower_balance(2, 3, pi).top == 0.0);

  // Boundary: cos(theta/2) = 1/3 with a single lower petal of weight 1.
  const double theta = 2.0 * std::acos(1.0 / 3.0);
  const auto edge = min_flower_residual(1, 3, theta, 2);
  CHECK(edge.minimized < 1e-9);
  CHECK(flower_balance(1, 3, theta).top == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(flower_balance(1, 3, theta).attainable);

  // Right angle top petal of weight 9.
  const auto wide = min_flower_residual(2, 3, pi / 2, 3);
  const double expected = 2.0 * 9.0 * std::cos(pi / 4) - 8.0;
  CHECK(expected == doctest::Approx(4.728).epsilon(1e-4));
  CHECK(wide.minimized == doctest::Approx(expected).epsilon(1e-9));
  CHECK_FALSE(flower_balance(2, 3, pi / 2).attainable);

  CHECK_THROWS_AS(min_flower_residual(2, 3, 4.0, 3), InvalidInput);
  CHECK_THROWS_AS(min_partial_flower_residual(2, 3, 1.0, {2}, 3), InvalidInput);
}

TEST_CASE("merging_lemma_check: four vertices") {
  const auto alpha = merging_lemma_check(4, 3, 3, 16);
  REQUIRE(alpha.vertices.size() == 4);
  CHECK(alpha.vertices[0].exponents == std::vector<int>{0, 1, 2});
  CHECK(alpha.vertices[3].exponents == std::vector<int>{2, 4, 5});
  CHECK(alpha.all_dominant);
  CHECK(alpha.partitions_checked == 14);  // Bell(4) - 1
  CHECK(alpha.partitions_dominant == 14);

  const auto hand = merging_lemma_check(4, 3, 3, 16, four_vertex_hand_listing());
  CHECK(hand.vertices[0].exponents == std::vector<int>{0, 2, 3});
  CHECK(hand.vertices[1].exponents == std::vector<int>{0, 1, 4});
  CHECK(hand.vertices[2].exponents == std::vector<int>{1, 2, 5});
  CHECK(hand.vertices[3].exponents == std::vector<int>{3, 4, 5});
  CHECK(hand.vertices[0].margin == "17");  // 27 - (1 + 9)
  CHECK(hand.vertices[0].oracle.minimized == doctest::Approx(17.0).epsilon(1e-9));
  CHECK(hand.all_dominant);

  // w0 = w1 merged: exponents {1, 2, 3, 4} under both listings.
  for (const auto* r : {&alpha, &hand}) {
    REQUIRE(r->merged_examples.size() == 2);
    CHECK(r->merged_examples[0].exponents == std::vector<int>{1, 2, 3, 4});
    CHECK(r->merged_examples[0].margin == "42");  // 81 - 39
    CHECK(r->merged_examples[0].oracle.minimized == doctest::Approx(42.0).epsilon(1e-9));
  }
}

TEST_CASE("merging_lemma_check: larger complete graphs") {
  for (int v = 3; v <= 7; ++v) {
    const auto r = merging_lemma_check(v, 3, 2, 4);
    CHECK(r.all_dominant);
    CHECK(r.partitions_checked > 0);
    for (const auto& c : r.vertices) {
      CHECK(c.exponents.size() == static_cast<std::size_t>(v - 1));
      CHECK(c.oracle.minimized == doctest::Approx(c.oracle.predicted).epsilon(1e-9));
    }
  }
  const auto big = merging_lemma_check(9, 3, 2, 2);
  CHECK(big.partitions_checked == 0);
  CHECK(big.vertices.size() == 9);
  CHECK(big.vertices[8].margin.size() > 10);

  CHECK_THROWS_AS(merging_lemma_check(2, 3, 2, 1), InvalidInput);
  CHECK_THROWS_AS(merging_lemma_check(4, 3, 2, 1, {{0, 1}, {0, 1}, {0, 2}, {0, 3}, {1, 3}, {2, 3}}),
                  InvalidInput);
}

TEST_CASE("oracle argument checks") {
  CHECK_THROWS_AS(min_cage_residual(1, 3, 2), InvalidInput);
  CHECK_THROWS_AS(min_cage_residual(3, 3, 1), InvalidInput);
  CHECK_THROWS_AS(min_cage_residual(3, 3, 2, -1), InvalidInput);
  CHECK(closed_form_minimum(3.0, {1.0, 1.0}) == 1.0);
  CHECK(closed_form_minimum(1.0, {1.0, 1.0}) == 0.0);
}
