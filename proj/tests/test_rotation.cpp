#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

#include "bicubic/rotation.hpp"

using namespace bicubic;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

std::vector<int> random_word(std::mt19937& rng, int len, int bound) {
  std::uniform_int_distribution<int> d(1, bound);
  std::vector<int> w(len);
  for (int& x : w) x = d(rng);
  return w;
}

}  // namespace

TEST_CASE("golden digits and Fibonacci denominators") {
  const auto cf = real_to_cf(kGolden, 20);
  REQUIRE(cf.available() == 20);
  for (int k = 0; k < 20; ++k) CHECK(cf.digit(k) == 1);
  // Binet: F_m = round(phi^m / sqrt 5); q_k = F_{k+1}, p_k = F_k.
  const auto conv = convergent_list(ContinuedFraction::periodic({1}), 20);
  const double phi = (1 + std::sqrt(5.0)) / 2;
  for (int k = 0; k <= 20; ++k) {
    const auto fib = [&](int m) { return static_cast<std::int64_t>(std::llround(std::pow(phi, m) / std::sqrt(5.0))); };
    CHECK(conv[k].q == fib(k + 1));
    CHECK(conv[k].p == fib(k));
  }
  CHECK(conv[20].q == 10946);
}

TEST_CASE("gamma squared digits") {
  const auto cf = real_to_cf(0.3819660113, 6);
  CHECK(cf.preperiod == std::vector<int>{2, 1, 1, 1, 1, 1});
}

TEST_CASE("convergents satisfy the three-term recursion and the determinant identity") {
  std::mt19937 rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto cf = ContinuedFraction::finite(random_word(rng, 18, 5));
    const auto c = convergent_list(cf, 18);
    for (int k = 1; k < 18; ++k) {
      CHECK(c[k + 1].q == cf.digit(k) * c[k].q + c[k - 1].q);
      const std::int64_t det = c[k + 1].p * c[k].q - c[k].p * c[k + 1].q;
      CHECK(std::llabs(det) == 1);
    }
  }
  CHECK_THROWS_AS(convergents(ContinuedFraction::finite({1, 2}), 5), DepthError);
}

TEST_CASE("digit extraction inverts evaluation on bounded words") {
  std::mt19937 rng(11);
  for (int t = 0; t < 30; ++t) {
    const auto pre = random_word(rng, t % 3, 3);
    const auto per = random_word(rng, 1 + t % 4, 3);
    const auto cf = ContinuedFraction::periodic(per, pre);
    const Big x = cf_limit<Big>(cf);
    const auto back = real_to_cf(x, 20);
    REQUIRE(back.available() == 20);
    for (int k = 0; k < 20; ++k) CHECK(back.digit(k) == cf.digit(k));
  }
}

TEST_CASE("Gauss shift commutes with digit extraction") {
  std::mt19937 rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto cf = ContinuedFraction::periodic(random_word(rng, 3, 4), random_word(rng, 2, 4));
    const Big x = cf_limit<Big>(cf);
    const Big y = 1 / x - floor(1 / x);
    const auto lhs = gauss_shift(real_to_cf(x, 16));
    const auto rhs = real_to_cf(y, 15);
    for (int k = 0; k < 15; ++k) CHECK(lhs.digit(k) == rhs.digit(k));
  }
}

TEST_CASE("finite expansions use the shorter form") {
  const auto cf = real_to_cf(0.4, 10);  // 2/5 = [2,2]
  CHECK(cf.preperiod == std::vector<int>{2, 2});
  CHECK(cf.depth_truncated);
  for (int d : cf.preperiod) CHECK(d >= 1);
}

TEST_CASE("bounded type") {
  CHECK(is_bounded_type(ContinuedFraction::periodic({1, 2, 3}), 3));
  CHECK_FALSE(is_bounded_type(ContinuedFraction::periodic({1, 4}), 3));
}

TEST_CASE("golden signature is fixed by the cocycle") {
  const double g2 = 1 - kGolden;
  for (auto conv : {CocycleConvention::nearest, CocycleConvention::dynamical}) {
    const auto s = cocycle_step(Signature{ContinuedFraction::periodic({1}), g2}, conv);
    CHECK(std::abs(s.delta - g2) < 1e-15);
  }
}

TEST_CASE("snapped cocycle orbit of the rounded golden signature stays put") {
  const Signature s{ContinuedFraction::periodic({1}), 0.3819660113};
  const auto o = cocycle_orbit(s, CocycleConvention::dynamical, 100, true);
  REQUIRE(o.snapped);
  CHECK(std::abs(o.snap_shift) < 1e-10);
  REQUIRE(o.orbit.size() == 101);
  for (const auto& x : o.orbit) CHECK(std::abs(x.delta - o.orbit.front().delta) < 1e-12);
  // Without snapping the 1e-11 input offset grows like phi^k.
  const auto raw = cocycle_orbit(s, CocycleConvention::dynamical, 100, false);
  CHECK_FALSE(raw.snapped);
  double worst = 0;
  for (const auto& x : raw.orbit) worst = std::max(worst, std::abs(x.delta - s.delta));
  CHECK(worst > 1e-6);
}

TEST_CASE("periodic signatures close up under the cocycle") {
  for (auto conv : {CocycleConvention::nearest, CocycleConvention::dynamical}) {
    for (int period : {1, 2}) {
      const auto found = find_periodic_signatures(period, 3, conv);
      CHECK_FALSE(found.orbits.empty());
      for (const auto& orbit : found.orbits) {
        REQUIRE(static_cast<int>(orbit.size()) == period);
        Signature s = orbit.front();
        for (int k = 0; k < period; ++k) s = cocycle_step(s, conv);
        CHECK(std::abs(s.delta - orbit.front().delta) < 1e-10);
        CHECK(signature_period(orbit.front(), conv, 4) == period);
      }
    }
  }
}

TEST_CASE("conventions and domain errors") {
  CHECK(parse_convention("dynamical") == CocycleConvention::dynamical);
  CHECK(to_string(CocycleConvention::fractional) == "fractional");
  CHECK_THROWS(parse_convention("other"));
  CHECK_THROWS_AS(real_to_cf(1.5, 3), DomainError);
  CHECK_THROWS_AS(cocycle_step(Signature{ContinuedFraction::periodic({1}), 1.5}, CocycleConvention::nearest),
                  DomainError);
}
