#include <doctest.h>

#include <cmath>
#include <random>

#include "bicubic/speclab.hpp"

using namespace bicubic;

namespace {

const Signature kGolden{ContinuedFraction::periodic({1}), 0.3819660112501051};

const TunedLift& golden() {
  static const TunedLift t = tune_to_signature(FamilyKind::trig, kGolden);
  return t;
}

const RefineReport& refined24() {
  static const RefineReport r = [] {
    RefineOptions o;
    o.degree = 24;
    o.threads = 1;
    return fixed_point_refine(golden().lift, o);
  }();
  return r;
}

}  // namespace

TEST_CASE("log-linear fit recovers a synthetic rate") {
  std::vector<int> n{2, 3, 4, 5, 6};
  std::vector<double> d;
  for (int k : n) d.push_back(3.0 * std::pow(0.4, k));
  const auto r = fit_log_linear(n, d);
  CHECK(std::abs(r.rate - 0.4) < 1e-12);
  CHECK(std::abs(r.r2 - 1) < 1e-12);
  CHECK(std::abs(std::exp(r.intercept) - 3.0) < 1e-10);
}

TEST_CASE("spectral report on explicit matrices") {
  const auto id = spectrum(Eigen::MatrixXd::Identity(5, 5));
  CHECK(id.unstable_count == 0);
  CHECK(id.neutral_band.size() == 5);
  for (const auto& z : id.eigenvalues) CHECK(std::abs(z - 1.0) < 1e-14);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m.diagonal() << 0.5, -3.0, 2.0, 0.1;
  const auto r = spectrum(m);
  CHECK(r.unstable_count == 2);
  CHECK(r.neutral_band.empty());
  CHECK(std::abs(r.eigenvalues[0] - (-3.0)) < 1e-14);
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i)
    CHECK(std::abs(r.eigenvalues[i]) <= std::abs(r.eigenvalues[i - 1]));

  // A rotation block has a complex pair of modulus 2.
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -2, 2, 0;
  CHECK(spectrum(rot).unstable_count == 2);
}

TEST_CASE("chart coordinates round trip on the template") {
  const CommutingPair p = normalize(extract_pair(golden().lift, 4, 24), PairOptions{24});
  const OperatorChart chart(p, 1, ChartOptions{24});
  const auto v = chart.to_coordinates(p);
  CHECK(v.size() == chart.dim());
  const CommutingPair q = chart.from_coordinates(v);
  CHECK(pair_distance(p, q) < 1e-10);
}

TEST_CASE("golden fixed point at low degree") {
  const auto& r = refined24();
  CHECK(r.residual < 1e-6);
  REQUIRE(r.jacobian.size() > 0);
  const auto s = spectrum(r.jacobian);
  CHECK(s.unstable_count == 2);
  CHECK(s.neutral_band.empty());
  CHECK(pair_validate(r.pair, 1e-8).ok);
  const auto [a, b] = leading_eigenvectors(r.jacobian);
  CHECK(std::abs(a.norm() - 1) < 1e-12);
  CHECK(std::acos(std::min(1.0, std::abs(a.dot(b)))) > 0.1);
}

TEST_CASE("Jacobian agrees with a directional difference") {
  const auto& r = refined24();
  const OperatorChart chart(r.pair, 1, ChartOptions{24});
  const auto x = chart.to_coordinates(r.pair);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(x.size());
  for (int i = 0; i < v.size(); ++i) v(i) = g(rng);
  v /= v.norm();
  const double eps = 1e-6;
  const Eigen::VectorXd fd = (chart.apply(x + eps * v) - chart.apply(x - eps * v)) / (2 * eps);
  const Eigen::VectorXd jv = jacobian_fd(chart, x, 1e-6, 1) * v;
  CHECK((fd - jv).norm() / jv.norm() < 1e-3);
  // Halving the direction halves the image to first order.
  const Eigen::VectorXd fd2 = (chart.apply(x + eps * 0.5 * v) - chart.apply(x - eps * 0.5 * v)) / (2 * eps);
  CHECK((2 * fd2 - fd).norm() / fd.norm() < 1e-3);
}

TEST_CASE("Jacobian step sizes agree on the top eigenvalues") {
  const auto& r = refined24();
  const OperatorChart chart(r.pair, 1, ChartOptions{24});
  const auto x = chart.to_coordinates(r.pair);
  const auto s1 = spectrum(jacobian_fd(chart, x, 1e-6, 1));
  const auto s2 = spectrum(jacobian_fd(chart, x, 5e-7, 1));
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(std::abs(s1.eigenvalues[k]) - std::abs(s2.eigenvalues[k])) < 0.01 * std::abs(s1.eigenvalues[k]));
}

TEST_CASE("same-signature maps converge under renormalization") {
  TuneOptions o;
  o.shape = 0.15;
  o.c_guess = golden().result.params.c;
  const auto second = tune_to_signature(FamilyKind::trig, kGolden, o);
  const auto r = convergence_experiment(golden().lift, second.lift, 2, 6, 32);
  REQUIRE(r.distances.size() == 5);
  for (std::size_t i = 1; i < r.distances.size(); ++i) CHECK(r.distances[i] < r.distances[i - 1]);
  CHECK(r.rate > 0);
  CHECK(r.rate < 1);
}

TEST_CASE("real bounds are positive and finite") {
  const auto rec = real_bounds_monitor(golden().lift, 3, 6, 32);
  REQUIRE(rec.size() == 4);
  for (const auto& b : rec) {
    CHECK(b.ratio > 0);
    CHECK(std::isfinite(b.c1norm));
  }
  const auto w = bounds_window(rec, 3, 6);
  CHECK(w.ratio_lo <= w.ratio_hi);
  CHECK(w.c1_lo <= w.c1_hi);
}

TEST_CASE("collision probe on the golden baseline") {
  // The seed comes from the periodic search, as in the lab, not from kGolden.
  const auto found = find_periodic_signatures(1, 1, CocycleConvention::dynamical);
  REQUIRE(found.orbits.size() == 1);
  RefineOptions o;
  o.degree = 24;
  o.threads = 1;
  const auto recs = collision_probe(found.orbits, o, TuneOptions{});
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].error.empty());
  CHECK(recs[0].residual < 1e-6);
  CHECK(recs[0].unstable_count == 2);
  CHECK(recs[0].angle > 0.1);
}
