// Acceptance gate: one line per criterion, exit status 0 when every
// criterion not listed with --known-fail passes.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "CLI11.hpp"
#include "bicubic/speclab.hpp"

using namespace bicubic;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Signature kGolden{ContinuedFraction::periodic({1}), 0.3819660112501051};

const TunedLift& golden() {
  static const TunedLift t = tune_to_signature(FamilyKind::trig, kGolden);
  return t;
}

// Same signature, different shape.
const TunedLift& golden_second() {
  static const TunedLift t = [] {
    TuneOptions o;
    o.shape = 0.15;
    o.c_guess = golden().result.params.c;
    return tune_to_signature(FamilyKind::trig, kGolden, o);
  }();
  return t;
}

const RefineReport& refined(int degree) {
  static std::map<int, RefineReport> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  RefineOptions o;
  o.degree = degree;
  return cache.emplace(degree, fixed_point_refine(golden().lift, o)).first->second;
}

Outcome cf_engine() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big gamma = (boost::multiprecision::sqrt(Big(5)) - 1) / 2;
  const ContinuedFraction cf = real_to_cf(gamma, 21);
  bool digits_ok = cf.preperiod.size() == 21;
  for (int d : cf.preperiod) digits_ok = digits_ok && d == 1;
  const auto conv = convergent_list(cf, 20);
  std::int64_t f0 = 0, f1 = 1;  // q_k = F_{k+1}
  bool q_ok = conv.size() == 21;
  for (int k = 0; k <= 20 && q_ok; ++k) {
    q_ok = conv[k].q == f1 && conv[k].p == f0;
    const std::int64_t f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
  }
  return {digits_ok && q_ok, fmt("21 digits all 1: %s, q_k = F_{k+1} for k <= 20: %s (q_20 = %lld)",
                                 digits_ok ? "yes" : "no", q_ok ? "yes" : "no",
                                 static_cast<long long>(conv.back().q))};
}

Outcome extraction_oracle() {
  const CircleLift& f = golden().lift;
  const auto cr = closest_returns(f, 8);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_probe = 0, worst_comm = 0;
  for (int n = 1; n <= 6; ++n) {
    const CommutingPair p = extract_pair(f, n, 64);
    auto probe = [&](const MapChain& c, const ClosestReturn& r) {
      const Interval& dom = c.domain();
      for (int i = 0; i < 50; ++i) {
        const double x = dom.lo + u(rng) * dom.length();
        const double direct = lift_iterate(f, x, static_cast<long>(r.q)) - static_cast<double>(r.p);
        worst_probe = std::max(worst_probe, std::abs(chain_eval(c, x) - direct));
      }
    };
    probe(p.eta, cr[n + 1]);
    probe(p.xi, cr[n]);
    worst_comm = std::max(worst_comm, pair_validate(p).commutation_residual);
  }
  return {worst_probe < 1e-9 && worst_comm < 1e-9,
          fmt("n = 1..6 (level 0 holds both critical points), max probe error %.2e, max commutation %.2e",
              worst_probe, worst_comm)};
}

Outcome renorm_consistency() {
  const CircleLift& f = golden().lift;
  double worst = 0;
  CommutingPair next = normalize(extract_pair(f, 1, 64));
  for (int n = 1; n <= 6; ++n) {
    const CommutingPair here = next;
    next = normalize(extract_pair(f, n + 1, 64));
    worst = std::max(worst, pair_distance(renormalize(here), next));
  }
  return {worst < 1e-8, fmt("n = 1..6 at degree 64, max pair distance %.2e", worst)};
}

Outcome gauss_action() {
  // delta > rho keeps the two critical points apart at level 0, whose height is a_1.
  const std::vector<Signature> targets{{ContinuedFraction::periodic({2, 1, 3}), 0.7},
                                       {ContinuedFraction::periodic({3, 1, 1, 2}), 0.6},
                                       {ContinuedFraction::periodic({2, 3}), 0.75}};
  bool ok = true;
  std::string detail;
  for (const auto& s : targets) {
    ok = ok && is_bounded_type(s.rho, 3);
    CommutingPair p = normalize(extract_pair(tune_to_signature(FamilyKind::trig, s).lift, 0, 64));
    std::string seen;
    int matched = 0;
    for (int k = 1; k <= 10; ++k) {
      const Height h = height(p);
      seen += h.infinite ? "inf" : std::to_string(h.value);
      if (!h.infinite && h.value == s.rho.digit(k)) ++matched;
      if (k < 10) p = renormalize(p);
    }
    ok = ok && matched == 10;
    detail += fmt("%s%s: %s (%d/10)", detail.empty() ? "" : "; ", to_string(s.rho).c_str(), seen.c_str(), matched);
  }
  return {ok, detail};
}

Outcome cocycle_transport() {
  const Signature target{ContinuedFraction::periodic({2, 1, 3}), 0.7};
  const CircleLift f = tune_to_signature(FamilyKind::trig, target).lift;
  const DeltaEstimate md = signature_delta(f, 1000000);
  // Level 0 is the once-renormalized map; deeper levels repeat the step pair to pair.
  Signature base{target.rho, md.birkhoff};
  double base_err = md.error;
  double worst_ratio = 0;
  for (int n = 0; n <= 3; ++n) {
    const PairSignature ps = pair_signature(normalize(extract_pair(f, n, 64)), 1000000, 8);
    const Signature predicted = cocycle_step(base, CocycleConvention::dynamical);
    const double tol = ps.delta_error + base_err / base.rho_value();
    worst_ratio = std::max(worst_ratio, std::abs(ps.signature.delta - predicted.delta) / tol);
    base = Signature{predicted.rho, ps.signature.delta};
    base_err = ps.delta_error;
  }
  const CocycleOrbit orbit = cocycle_orbit(kGolden, CocycleConvention::dynamical, 100, true);
  double fixed_dev = 0;
  for (const auto& s : orbit.orbit) fixed_dev = std::max(fixed_dev, std::abs(s.delta - kGolden.delta));
  return {worst_ratio <= 1 && fixed_dev < 1e-12 && orbit.orbit.size() == 101,
          fmt("levels 0..3 of %s: max |measured - step| / (3/q_K bound) = %.3f; golden 100 steps, max drift %.2e",
              to_string(target.rho).c_str(), worst_ratio, fixed_dev)};
}

Outcome convergence() {
  const auto r = convergence_experiment(golden().lift, golden_second().lift, 2, 8, 64);
  return {r.r2 > 0.98 && r.rate > 0 && r.rate < 1, fmt("n = 2..8, R^2 = %.4f, rate = %.4f", r.r2, r.rate)};
}

Outcome real_bounds() {
  const auto a = real_bounds_monitor(golden().lift, 3, 8, 64);
  const auto b = real_bounds_monitor(golden_second().lift, 3, 8, 64);
  // Window fixed from the first seed at level 3: a factor 2 either way.
  const double r0 = a.front().ratio, c0 = a.front().c1norm;
  double rlo = INFINITY, rhi = 0, clo = INFINITY, chi = 0;
  for (const auto* rec : {&a, &b})
    for (const auto& x : *rec) {
      rlo = std::min(rlo, x.ratio);
      rhi = std::max(rhi, x.ratio);
      clo = std::min(clo, x.c1norm);
      chi = std::max(chi, x.c1norm);
    }
  const bool ok = a.size() == 6 && b.size() == 6 && rlo >= r0 / 2 && rhi <= 2 * r0 && clo >= c0 / 2 && chi <= 2 * c0;
  return {ok, fmt("window ratio [%.3f, %.3f], C1 [%.3f, %.3f]; seen ratio [%.3f, %.3f], C1 [%.3f, %.3f]", r0 / 2,
                  2 * r0, c0 / 2, 2 * c0, rlo, rhi, clo, chi)};
}

Outcome hyperbolicity() {
  bool ok = true;
  std::string detail;
  std::vector<std::array<double, 2>> top;
  for (int d : {32, 48, 64}) {
    const RefineReport& r = refined(d);
    const SpectralReport s = spectrum(r.jacobian);
    ok = ok && r.residual < 1e-6 && s.unstable_count == 2 && s.neutral_band.empty();
    top.push_back({std::abs(s.eigenvalues[0]), std::abs(s.eigenvalues[1])});
    detail += fmt("deg %d: residual %.1e, unstable %d, neutral %zu, top %.5f %.5f; ", d, r.residual, s.unstable_count,
                  s.neutral_band.size(), top.back()[0], top.back()[1]);
  }
  double drift = 0;
  for (int k = 0; k < 2; ++k) {
    double lo = INFINITY, hi = 0;
    for (const auto& t : top) {
      lo = std::min(lo, t[k]);
      hi = std::max(hi, t[k]);
    }
    drift = std::max(drift, (hi - lo) / hi);
  }
  ok = ok && drift < 0.05;
  return {ok, detail + fmt("top-2 drift %.2e", drift)};
}

Outcome compactness() {
  const SpectralReport s = spectrum(refined(64).jacobian);
  int first = -1;
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    if (std::abs(s.eigenvalues[i]) < 0.5) {
      first = static_cast<int>(i) + 1;
      break;
    }
  std::string head;
  for (int i = 0; i < 12 && i < static_cast<int>(s.eigenvalues.size()); ++i)
    head += fmt("%s%.3f", i ? " " : "", std::abs(s.eigenvalues[i]));
  return {first > 0 && first <= 10, fmt("first modulus below 0.5 at index %d of %zu (1-based); leading moduli %s",
                                        first, s.eigenvalues.size(), head.c_str())};
}

MapChain two_node_chain(double shift) {
  const Interval u(-1.0, 1.0);
  const auto d0 = cheb_fit([](double x) { return x + 0.1 * std::sin(x); }, u, 24, Monotone::increasing);
  const Interval w1 = Interval::spanning(std::pow(d0(-1.0), 3), std::pow(d0(1.0), 3));
  const auto d1 = cheb_fit([&](double y) { return y + shift; }, w1, 1, Monotone::increasing);
  const Interval w2 = Interval::spanning(std::pow(d1(w1.lo), 3), std::pow(d1(w1.hi), 3));
  const auto d2 = cheb_fit([](double y) { return 0.5 * y + 0.05 * y * y + 0.2; }, w2, 24, Monotone::increasing);
  return MapChain({d0, d1, d2}, std::vector<NodeMeta>(2));
}

Outcome degenerate_guard() {
  const auto apart = chain_critical_points(two_node_chain(0.3));
  const bool control = apart.size() == 2 && apart[0].order == 3 && apart[1].order == 3;
  bool control_triple = true;
  try {
    chain_to_triple(two_node_chain(0.3));
  } catch (const Error&) {
    control_triple = false;
  }
  const MapChain collided = two_node_chain(0.0);
  const auto cps = chain_critical_points(collided);
  const bool detected = cps.size() == 1 && cps[0].order == 9;
  int excluded_order = 0;
  try {
    chain_to_triple(collided);
  } catch (const DegenerateCriticalError& e) {
    excluded_order = e.order;
  }
  return {control && control_triple && detected && excluded_order == 9,
          fmt("collided chain: %zu critical point(s), order %d; triple path refused with order %d; control: two of "
              "order 3, triple %s",
              cps.size(), cps.empty() ? 0 : cps[0].order, excluded_order, control_triple ? "built" : "failed")};
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds, 0 for none
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance"};
  std::vector<int> known_fail, only;
  app.add_option("--known-fail", known_fail, "criteria whose failure is documented and does not fail the gate");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "continued fractions", 1, cf_engine},
      {2, "extraction oracle", 60, extraction_oracle},
      {3, "renormalization consistency", 120, renorm_consistency},
      {4, "Gauss action on heights", 0, gauss_action},
      {5, "cocycle transport", 0, cocycle_transport},
      {6, "exponential convergence", 600, convergence},
      {7, "real bounds", 0, real_bounds},
      {8, "hyperbolicity", 1800, hyperbolicity},
      {9, "compactness proxy", 0, compactness},
      {10, "degenerate guard", 0, degenerate_guard},
  };
  const std::set<int> known(known_fail.begin(), known_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  int hard_failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && secs > c.budget) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget);
    }
    const bool excused = !o.pass && known.count(c.id);
    if (!o.pass && !excused) ++hard_failures;
    std::printf("%s %2d %-28s %8.2fs  %s\n", o.pass ? "PASS" : (excused ? "FAIL (known, see notes)" : "FAIL"), c.id,
                c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s: %d unexpected failure(s)\n", hard_failures ? "REJECTED" : "ACCEPTED", hard_failures);
  return hard_failures ? 1 : 0;
}
