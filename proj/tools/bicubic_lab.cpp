#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "bicubic/io.hpp"
#include "bicubic/speclab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bicubic;

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Lab {
public:
  Lab(RunConfig rc, Manifest& m) : rc_(std::move(rc)), m_(m), out_(rc_.out), t0_(std::chrono::steady_clock::now()) {}

  void run(Experiment e) {
    log("start " + to_string(e));
    switch (e) {
      case Experiment::rotnum: rotnum(); break;
      case Experiment::signature: signature(); break;
      case Experiment::partition: partition(); break;
      case Experiment::extract: extract(); break;
      case Experiment::renorm: renorm(); break;
      case Experiment::converge: converge(); break;
      case Experiment::bounds: bounds(); break;
      case Experiment::fixedpoint: fixedpoint(); break;
      case Experiment::spectrum: spectrum_sweep(); break;
      case Experiment::cocycle: cocycle(); break;
      case Experiment::collision: collision(); break;
    }
    log("done " + to_string(e));
  }

private:
  void log(const std::string& s) const {
    if (!rc_.verbose) return;
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    std::fprintf(stderr, "[%8.2fs] %s\n", t, s.c_str());
  }

  CsvWriter csv(const std::string& name, std::vector<std::string> header) {
    m_.artifacts.push_back({name, header, "csv"});
    return CsvWriter(out_ / name, std::move(header));
  }
  void json_artifact(const std::string& name, const json& j) {
    m_.artifacts.push_back({name, {}, "json"});
    write_json(out_ / name, j);
  }
  void text_artifact(const std::string& name, const std::string& body) {
    m_.artifacts.push_back({name, {}, "text"});
    std::ofstream o(out_ / name, std::ios::binary);
    if (!o) throw ConfigError("cannot write " + (out_ / name).string());
    o << body;
  }

  Signature target() const {
    return Signature{ContinuedFraction::periodic(rc_.target_period, rc_.target_preperiod), rc_.target_delta};
  }
  CocycleConvention convention() const { return parse_convention(rc_.convention); }

  TuneOptions tune_options(double shape) const {
    TuneOptions t;
    t.q_cap = static_cast<long>(rc_.tune_q_cap);
    t.delta_orbit = rc_.tune_delta_orbit;
    t.delta_tol = rc_.tune_delta_tol;
    t.shape = shape;
    return t;
  }

  RefineOptions refine_options(int degree) const {
    RefineOptions o;
    o.degree = degree;
    o.level = rc_.fp_level;
    o.iterations = rc_.fp_iterations;
    o.period = rc_.fp_period;
    o.newton = rc_.fp_newton;
    o.h = rc_.jacobian_h;
    o.threads = rc_.threads;
    return o;
  }

  const CircleLift& map() {
    if (map_) return *map_;
    json info;
    if (rc_.tune) {
      log("tuning " + rc_.family + " map to " + to_string(target().rho));
      const auto t = tune_to_signature(parse_family(rc_.family), target(), tune_options(rc_.shape));
      map_ = t.lift;
      first_c_ = t.result.params.c;
      info = {{"tuned", true},
              {"delta_measured", t.result.delta_measured},
              {"delta_error", t.result.delta_error},
              {"q_matched", t.result.q_matched},
              {"outer_iterations", t.result.outer_iterations}};
    } else if (rc_.family == "trig") {
      map_ = trig_lift({rc_.omega, rc_.c, rc_.shape});
      info = {{"tuned", false}};
    } else {
      map_ = blaschke_lift({rc_.blaschke_t, rc_.blaschke_p, rc_.blaschke_q});
      info = {{"tuned", false}};
    }
    info["family"] = map_->family;
    info["params"] = map_->params;
    info["c"] = map_->c();
    m_.results["map"] = info;
    return *map_;
  }

  // Same signature, different shape: the second seed of the universality checks.
  const CircleLift& second_map() {
    if (second_) return *second_;
    if (!rc_.tune) throw ConfigError("map.tune: the second seed needs a tuning target (map.tune = true)");
    map();
    if (rc_.family == "trig" && rc_.converge_shape == rc_.shape)
      throw ConfigError("converge.shape: must differ from map.shape");
    TuneOptions o = tune_options(rc_.converge_shape);
    if (rc_.family == "trig") o.c_guess = first_c_;
    log("tuning second seed, shape " + format_double(rc_.converge_shape));
    const auto t = tune_to_signature(FamilyKind::trig, target(), o);
    second_ = t.lift;
    m_.results["second_map"] = {{"family", second_->family},
                                {"params", second_->params},
                                {"delta_measured", t.result.delta_measured},
                                {"delta_error", t.result.delta_error}};
    return *second_;
  }

  const CommutingPair& pair(int n) {
    auto it = pairs_.find(n);
    if (it == pairs_.end()) {
      log("extracting level " + std::to_string(n));
      it = pairs_.emplace(n, extract_pair(map(), n, rc_.degree)).first;
    }
    return it->second;
  }

  const RefineReport& refined(int degree) {
    auto it = refined_.find(degree);
    if (it == refined_.end()) {
      log("refining fixed point at degree " + std::to_string(degree));
      RefineReport rep = fixed_point_refine(map(), refine_options(degree));
      if (rep.jacobian.size() == 0) {
        const OperatorChart chart(rep.pair, rc_.fp_period, ChartOptions{degree});
        rep.jacobian = jacobian_fd(chart, chart.to_coordinates(rep.pair), rc_.jacobian_h, rc_.threads);
      }
      it = refined_.emplace(degree, std::move(rep)).first;
    }
    return it->second;
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1p-53; }

  // ------------------------------------------------------------------

  void rotnum() {
    const CircleLift& f = map();
    const auto cr = closest_returns(f, rc_.rotnum_depth, static_cast<long>(rc_.tune_q_cap));
    auto w = csv("rotnum.csv", {"k", "q", "p", "distance"});
    for (const auto& r : cr) w.row({r.k, r.q, r.p, r.d});
    const ContinuedFraction cf = digits_from_returns(cr);
    std::string digits;
    for (int k = 0; k < cf.available(); ++k) digits += (k ? " " : "") + std::to_string(cf.digit(k));
    text_artifact("digits.txt", digits + "\n");
    const auto it = rotation_number(f, RotationMethod::iterate, rc_.orbit);
    json res = {{"digits", to_string(cf)}, {"value", it.value}, {"error", it.error}};
    try {
      const auto h = rotation_number_heights(f, rc_.rotnum_depth, rc_.degree);
      res["heights_digits"] = to_string(h.cf);
      res["heights_value"] = h.value;
      res["heights_error"] = h.error;
      res["methods_agree"] = std::abs(h.value - it.value) <= h.error + it.error;
    } catch (const Error& e) {
      res["heights_failure"] = e.what();
    }
    m_.results["rotnum"] = res;
  }

  void signature() {
    const CircleLift& f = map();
    const CocycleConvention conv = convention();
    auto w = csv("signature.csv", {"source", "level", "rho", "delta", "delta_error", "predicted", "deviation"});
    const auto cr = closest_returns(f, rc_.signature_depth, static_cast<long>(rc_.tune_q_cap));
    const auto d = signature_delta(f, rc_.orbit);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    w.row({std::string("map"), -1, to_string(digits_from_returns(cr)), d.refined, d.error, nan, nan});

    // Rotation numbers of the pairs: the Gauss shifts of the target when
    // tuned, the measured heights otherwise.
    ContinuedFraction rho_prev;
    double delta_prev = nan, err_prev = nan;
    double worst = 0;
    bool within = true;
    for (int n = rc_.level_min; n <= rc_.level_max; ++n) {
      const CommutingPair p = normalize(pair(n), PairOptions{rc_.degree});
      const PairSignature s = pair_signature(p, rc_.orbit, rc_.signature_depth, PairOptions{rc_.degree});
      ContinuedFraction rho = s.signature.rho;
      if (rc_.tune) {
        rho = target().rho;
        for (int k = 0; k <= n; ++k) rho = gauss_shift(rho);
      }
      double predicted = nan, deviation = nan;
      if (std::isfinite(delta_prev)) {
        predicted = cocycle_step(Signature{rho_prev, delta_prev}, conv).delta;
        deviation = s.signature.delta - predicted;
        const double allowed = s.delta_error + err_prev / cf_limit<double>(rho_prev);
        worst = std::max(worst, std::abs(deviation));
        within = within && std::abs(deviation) <= allowed;
      }
      w.row({std::string("pair"), n, to_string(s.signature.rho), s.signature.delta, s.delta_error, predicted,
             deviation});
      rho_prev = rho;
      delta_prev = s.signature.delta;
      err_prev = s.delta_error;
    }
    m_.results["signature"] = {{"map_delta", d.refined},
                               {"map_delta_error", d.error},
                               {"convention", rc_.convention},
                               {"max_transport_deviation", worst},
                               {"transport_within_error", within}};
  }

  void partition() {
    const auto parts = dynamical_partition(map(), rc_.partition_level);
    auto w = csv("partition.csv", {"index", "lo", "hi", "label"});
    double total = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto& e = parts[i];
      total += e.hi - e.lo;
      w.row({static_cast<int>(i), e.lo, e.hi,
             "f^" + std::to_string(e.iterate) + "(I_" + std::to_string(e.family) + ")"});
    }
    m_.results["partition"] = {{"level", rc_.partition_level},
                               {"elements", static_cast<int>(parts.size())},
                               {"total_length", total}};
  }

  void extract() {
    const CircleLift& f = map();
    auto w = csv("extract.csv", {"n", "eta_nodes", "xi_nodes", "eta0", "xi0", "height", "commutation_residual",
                                 "gluing_residual", "eta_probe_error", "xi_probe_error"});
    const auto cr = closest_returns(f, rc_.level_max + 2, static_cast<long>(rc_.tune_q_cap));
    double worst_probe = 0, worst_comm = 0;
    for (int n = rc_.level_min; n <= rc_.level_max; ++n) {
      const CommutingPair& p = pair(n);
      if (static_cast<int>(cr.size()) <= n + 1) throw DepthError("not enough closest returns for level " + std::to_string(n));
      const PairReport rep = pair_validate(p, rc_.validate_tol);
      auto probe = [&](const MapChain& c, const ClosestReturn& r) {
        double err = 0;
        const Interval& dom = c.domain();
        for (int i = 0; i < rc_.probes; ++i) {
          const double x = dom.lo + uniform() * (dom.hi - dom.lo);
          const double direct = lift_iterate(f, x, static_cast<long>(r.q)) - static_cast<double>(r.p);
          err = std::max(err, std::abs(chain_eval(c, x) - direct));
        }
        return err;
      };
      const double ee = probe(p.eta, cr[n + 1]);
      const double ex = probe(p.xi, cr[n]);
      worst_probe = std::max({worst_probe, ee, ex});
      worst_comm = std::max(worst_comm, rep.commutation_residual);
      w.row({n, p.eta.node_count(), p.xi.node_count(), p.eta0(), p.xi0(), height(p).value,
             rep.commutation_residual, rep.gluing_residual, ee, ex});
      json_artifact("pair_" + std::to_string(n) + ".json", pair_to_json(p));
    }
    m_.results["extract"] = {{"max_probe_error", worst_probe}, {"max_commutation_residual", worst_comm}};
  }

  void renorm() {
    const PairOptions po{rc_.degree};
    auto w = csv("renorm.csv", {"n", "height", "distance"});
    double worst = 0;
    std::vector<int> heights;
    for (int n = rc_.level_min; n < rc_.level_max; ++n) {
      const CommutingPair a = normalize(pair(n), po);
      const int h = height(a).value;
      const double d = pair_distance(renormalize(a, po), normalize(pair(n + 1), po));
      worst = std::max(worst, d);
      heights.push_back(h);
      w.row({n, h, d});
    }
    m_.results["renorm"] = {{"max_distance", worst}, {"heights", heights}};
  }

  void converge() {
    const auto r = convergence_experiment(map(), second_map(), rc_.level_min, rc_.level_max, rc_.degree);
    auto w = csv("convergence.csv", {"n", "distance"});
    for (std::size_t i = 0; i < r.levels.size(); ++i) w.row({r.levels[i], r.distances[i]});
    m_.results["converge"] = {{"rate", r.rate}, {"r2", r.r2}, {"intercept", r.intercept}};
  }

  void bounds() {
    json res = json::object();
    auto one = [&](const CircleLift& f, const std::string& file) {
      const auto rec = real_bounds_monitor(f, rc_.level_min, rc_.level_max, rc_.degree);
      auto w = csv(file, {"n", "ratio", "c1norm"});
      for (const auto& r : rec) w.row({r.n, r.ratio, r.c1norm});
      const auto win = bounds_window(rec, rc_.level_min, rc_.level_max);
      return json{{"ratio", {win.ratio_lo, win.ratio_hi}}, {"c1norm", {win.c1_lo, win.c1_hi}}};
    };
    res["first"] = one(map(), "bounds.csv");
    res["second"] = one(second_map(), "bounds_second.csv");
    m_.results["bounds"] = res;
  }

  void fixedpoint() {
    const RefineReport& rep = refined(rc_.degree);
    auto w = csv("fixedpoint.csv", {"iteration", "distance"});
    for (std::size_t i = 0; i < rep.distances.size(); ++i) w.row({static_cast<int>(i), rep.distances[i]});
    auto nw = csv("newton.csv", {"step", "residual"});
    for (std::size_t i = 0; i < rep.newton_residuals.size(); ++i) nw.row({static_cast<int>(i), rep.newton_residuals[i]});
    json_artifact("fixed_point.json", pair_to_json(rep.pair));
    m_.results["fixedpoint"] = {{"residual", rep.residual},
                                {"converged", rep.residual < rc_.fixed_point_tol},
                                {"tolerance", rc_.fixed_point_tol}};
  }

  void spectrum_sweep() {
    auto w = csv("spectrum.csv", {"re", "im", "modulus", "index", "degree"});
    json per = json::array();
    std::vector<std::vector<double>> top;
    for (int d : rc_.spectrum_degrees) {
      const RefineReport& rep = refined(d);
      const SpectralReport s = spectrum(rep.jacobian, rc_.spectrum_margin);
      int first_small = -1;
      for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const auto& z = s.eigenvalues[i];
        w.row({z.real(), z.imag(), std::abs(z), static_cast<int>(i), d});
        if (first_small < 0 && std::abs(z) < 0.5) first_small = static_cast<int>(i);
      }
      std::vector<double> t;
      for (std::size_t i = 0; i < 2 && i < s.eigenvalues.size(); ++i) t.push_back(std::abs(s.eigenvalues[i]));
      top.push_back(t);
      per.push_back({{"degree", d},
                     {"residual", rep.residual},
                     {"unstable_count", s.unstable_count},
                     {"neutral_count", static_cast<int>(s.neutral_band.size())},
                     {"top_moduli", t},
                     {"first_index_below_half", first_small}});
    }
    double drift = 0;
    for (const auto& t : top)
      for (std::size_t k = 0; k < t.size() && k < top.back().size(); ++k)
        drift = std::max(drift, std::abs(t[k] - top.back()[k]) / top.back()[k]);
    m_.results["spectrum"] = {{"degrees", per}, {"top2_drift", drift}, {"margin", rc_.spectrum_margin}};
  }

  void cocycle() {
    const Signature s = target();
    const CocycleOrbit o = cocycle_orbit(s, convention(), rc_.cocycle_steps, rc_.cocycle_snap);
    const int p = s.rho.preperiod.empty() ? static_cast<int>(s.rho.period.size()) : 0;
    auto w = csv("cocycle.csv", {"step", "rho", "delta", "deviation"});
    double worst = 0;
    for (std::size_t k = 0; k < o.orbit.size(); ++k) {
      double dev = std::numeric_limits<double>::quiet_NaN();
      if (p > 0) {
        dev = o.orbit[k].delta - o.orbit[k % p].delta;
        worst = std::max(worst, std::abs(dev));
      }
      w.row({static_cast<int>(k), to_string(o.orbit[k].rho), o.orbit[k].delta, dev});
    }
    m_.results["cocycle"] = {{"convention", rc_.convention},
                             {"snapped", o.snapped},
                             {"snap_shift", o.snap_shift},
                             {"drift", finite_or_null(o.drift)},
                             {"input_delta", o.input_delta},
                             {"max_deviation", p > 0 ? json(worst) : json(nullptr)}};
  }

  void collision() {
    const auto found = find_periodic_signatures(rc_.collision_period, rc_.collision_bound, convention());
    std::vector<std::vector<Signature>> orbits;
    for (auto orbit : found.orbits) {
      if (orbit.empty()) continue;
      const auto lo = std::min_element(orbit.begin(), orbit.end(),
                                       [](const Signature& a, const Signature& b) { return a.delta < b.delta; });
      std::rotate(orbit.begin(), lo, orbit.end());
      orbits.push_back(std::move(orbit));
    }
    std::stable_sort(orbits.begin(), orbits.end(),
                     [](const auto& a, const auto& b) { return a.front().delta < b.front().delta; });
    if (static_cast<int>(orbits.size()) > rc_.collision_count) orbits.resize(rc_.collision_count);

    // An exactly collided signature has no two-node template to refine.
    std::vector<std::vector<Signature>> usable;
    json excluded = json::array();
    for (const auto& o : orbits) {
      if (o.front().delta < 1e-9) excluded.push_back(to_string(o.front().rho));
      else usable.push_back(o);
    }
    RefineOptions ro = refine_options(rc_.collision_degree);
    const auto recs = collision_probe(usable, ro, tune_options(0.0));
    auto w = csv("collision.csv", {"delta", "unstable_count", "angle"});
    json errors = json::array();
    for (const auto& r : recs) {
      w.row({r.signature.delta, r.unstable_count, r.error.empty() ? r.angle : std::numeric_limits<double>::quiet_NaN()});
      if (!r.error.empty()) errors.push_back({{"rho", to_string(r.signature.rho)}, {"error", r.error}});
    }
    m_.results["collision"] = {{"probed", static_cast<int>(recs.size())},
                               {"excluded_order9", excluded},
                               {"errors", errors},
                               {"omitted_words", found.omitted}};
  }

  RunConfig rc_;
  Manifest& m_;
  fs::path out_;
  std::chrono::steady_clock::time_point t0_;
  std::mt19937_64 rng_{rc_.seed};
  std::optional<CircleLift> map_, second_;
  double first_c_ = -1;
  std::map<int, CommutingPair> pairs_;
  std::map<int, RefineReport> refined_;
};

int run_lab(const std::string& sub, const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<long long>& seed, const std::optional<int>& degree, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  Manifest m;
  m.subcommand = sub;
  m.started = utc_now();
  fs::path out_dir;
  auto finish = [&](int code) {
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_dir.empty()) {
      try {
        write_json(out_dir / "manifest.json", manifest_to_json(m));
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
      }
    }
    return code;
  };
  auto fail = [&](int code, const std::string& what) {
    m.status = "error";
    m.message = what;
    std::cerr << "error: " << what << "\n";
    return finish(code);
  };

  Config cfg;
  try {
    cfg = config_path.empty() ? Config::parse("", "<defaults>") : Config::load(config_path);
  } catch (const Error& e) {
    if (out) out_dir = *out;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    return fail(static_cast<int>(e.error_class()), e.what());
  }
  if (out) cfg.set("run.out", *out);
  if (seed) cfg.set("run.seed", std::to_string(*seed));
  if (degree) cfg.set("run.degree", std::to_string(*degree));
  if (verbose) cfg.set("run.verbose", "true");
  m.config = cfg;

  RunConfig rc;
  try {
    out_dir = cfg.get_string("run.out", RunConfig{}.out);
    fs::create_directories(out_dir);
    rc = run_config_from(cfg);
  } catch (const Error& e) {
    return fail(static_cast<int>(e.error_class()), e.what());
  } catch (const fs::filesystem_error& e) {
    out_dir.clear();
    return fail(2, e.what());
  }
  m.seed = rc.seed;
  m.degree = rc.degree;
  m.results["tolerances"] = {{"compat", rc.compat},
                             {"validate", rc.validate_tol},
                             {"fixed_point", rc.fixed_point_tol},
                             {"spectrum_margin", rc.spectrum_margin},
                             {"jacobian_h", rc.jacobian_h},
                             {"tune_delta_tol", rc.tune_delta_tol}};

  std::vector<Experiment> todo;
  if (sub == "run") todo = rc.experiments;
  else todo.push_back(parse_experiment(sub));
  json names = json::array();
  for (auto e : todo) names.push_back(to_string(e));
  m.results["experiments"] = names;

  Lab lab(rc, m);
  try {
    for (auto e : todo) lab.run(e);
  } catch (const Error& e) {
    return fail(static_cast<int>(e.error_class()), e.what());
  } catch (const std::exception& e) {
    return fail(3, e.what());
  }
  return finish(0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renormalization experiments for bi-cubic circle maps"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::string> out;
  std::optional<long long> seed;
  std::optional<int> degree;
  bool verbose = false;
  app.add_option("--config", config, "INI configuration file");
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "RNG seed for probe points")->check(CLI::NonNegativeNumber);
  app.add_option("--degree", degree, "working Chebyshev degree")->check(CLI::Range(8, 4096));
  app.add_flag("--verbose", verbose, "progress on stderr");

  app.add_subcommand("run", "experiments listed under run.experiments (none: manifest only)");
  for (auto e : all_experiments()) app.add_subcommand(to_string(e), "the " + to_string(e) + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return run_lab(sub, config, out, seed, degree, verbose);
}
