#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bicubic/families.hpp"

using namespace bicubic;

namespace {

const Signature kGoldenTarget{ContinuedFraction::periodic({1}), 0.3819660112501051};

const TunedLift& golden() {
  static const TunedLift t = tune_to_signature(FamilyKind::trig, kGoldenTarget);
  return t;
}

}  // namespace

TEST_CASE("trig lift is a degree-one lift with cubic critical points") {
  const auto f = trig_lift({0.3, 0.45, 0.0});
  for (double x : {-0.7, 0.1, 0.33, 0.9}) CHECK(std::abs(f.eval(x + 1) - f.eval(x) - 1) < 1e-13);
  CHECK(std::abs(f.eval(0.0) - 0.3) < 1e-15);
  for (double x0 : {0.0, 0.45}) {
    CHECK(std::abs(f.deriv(x0)) < 1e-14);
    // F' vanishes to second order: F'(x0 + u) / u^2 tends to a positive limit.
    const double a = f.deriv(x0 + 1e-3) / 1e-6, b = f.deriv(x0 + 2e-3) / 4e-6;
    CHECK(a > 0);
    CHECK(std::abs(a - b) / a < 1e-2);
  }
  // Derivative by central differences.
  for (double x : {0.2, 0.7}) {
    const double h = 1e-5;
    CHECK(std::abs((f.eval(x + h) - f.eval(x - h)) / (2 * h) - f.deriv(x)) < 1e-8);
  }
}

TEST_CASE("closest returns alternate sides and shrink") {
  const auto cr = closest_returns(golden().lift, 14);
  REQUIRE(cr.size() == 15);
  for (std::size_t k = 1; k < cr.size(); ++k) {
    CHECK(cr[k].d * cr[k - 1].d < 0);
    CHECK(std::abs(cr[k].d) < std::abs(cr[k - 1].d));
  }
  // Golden returns at Fibonacci times.
  CHECK(cr[10].q == 89);
}

TEST_CASE("tuned golden map: digits and delta") {
  const auto& t = golden();
  const auto rot = rotation_number(t.lift, RotationMethod::iterate, 1000000);
  REQUIRE(rot.cf.available() >= 12);
  for (int k = 0; k < 12; ++k) CHECK(rot.cf.digit(k) == 1);
  CHECK(std::abs(rot.value - 0.6180339887498949) < 1e-8);
  const auto d = signature_delta(t.lift, 1000000);
  CHECK(std::abs(d.refined - 0.382) < 0.01);
  CHECK(std::abs(d.refined - kGoldenTarget.delta) < 3 * d.error + 2e-7);
}

TEST_CASE("rotation number from heights agrees with the orbit") {
  const auto& f = golden().lift;
  const auto a = rotation_number(f, RotationMethod::iterate, 1000000);
  const auto b = rotation_number(f, RotationMethod::heights, 22, 48);
  for (int k = 0; k < 10; ++k) CHECK(b.cf.digit(k) == 1);
  CHECK(std::abs(a.value - b.value) < 1e-8);
}

TEST_CASE("tuning from its own answer converges at once") {
  const auto& first = golden();
  TuneOptions o;
  o.c_guess = first.result.params.c;
  const auto again = tune_to_signature(FamilyKind::trig, kGoldenTarget, o);
  CHECK(again.result.outer_iterations <= 2);
  CHECK(std::abs(again.result.params.c - first.result.params.c) < 1e-6);
}

TEST_CASE("dynamical partition tiles the circle") {
  const auto& f = golden().lift;
  for (int n : {2, 4, 6}) {
    const auto parts = dynamical_partition(f, n);
    const auto conv = convergent_list(ContinuedFraction::periodic({1}), n + 1);
    CHECK(static_cast<std::int64_t>(parts.size()) == conv[n].q + conv[n + 1].q);
    double total = 0;
    std::vector<std::pair<double, double>> iv;
    for (const auto& e : parts) {
      total += e.hi - e.lo;
      iv.push_back({e.lo, e.hi});
    }
    CHECK(std::abs(total - 1) < 1e-9);
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i) CHECK(iv[i].first >= iv[i - 1].second - 1e-9);
    CHECK(iv.back().second <= iv.front().first + 1 + 1e-9);
    const int j = partition_locate(parts, 0.5);
    REQUIRE(j >= 0);
    const auto& e = parts[j];
    CHECK(((0.5 > e.lo && 0.5 < e.hi) || (1.5 > e.lo && 1.5 < e.hi)));
  }
}

TEST_CASE("a second bounded-type target") {
  const Signature target{ContinuedFraction::periodic({1, 2}), 0.3};
  const auto t = tune_to_signature(FamilyKind::trig, target);
  const auto cr = closest_returns(t.lift, 10);
  const auto cf = digits_from_returns(cr);
  for (int k = 0; k < 10; ++k) CHECK(cf.digit(k) == target.rho.digit(k));
  CHECK(std::abs(t.result.delta_measured - 0.3) < 3 * t.result.delta_error + 2e-7);
}

TEST_CASE("family names") {
  CHECK(parse_family("trig") == FamilyKind::trig);
  CHECK(parse_family("blaschke") == FamilyKind::blaschke);
  CHECK_THROWS_AS(parse_family("logistic"), ConfigError);
}

TEST_CASE("Blaschke product on the circle") {
  const BlaschkeParams p{0.1, {2.5, 0.3}, {3.0, -0.4}};
  CHECK(blaschke_modulus_defect(p) < 1e-14);
  const auto v = blaschke_validate(p);
  INFO("min derivative " << v.min_derivative);
  if (v.bicubic) {
    const auto f = blaschke_lift(p);
    CHECK(std::abs(f.deriv(0.0)) < 1e-8);
    CHECK(std::abs(f.deriv(f.c())) < 1e-8);
    CHECK(std::abs(f.eval(0.3 + 1) - f.eval(0.3) - 1) < 1e-12);
  } else {
    CHECK_THROWS(blaschke_lift(p));
  }
}
