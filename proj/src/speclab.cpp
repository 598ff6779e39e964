#include "bicubic/speclab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <Eigen/Eigenvalues>

namespace bicubic {

namespace {

// Successive iterates alternate about the fixed point (negative unstable
// eigenvalues), so an image may fall short of the template by a few percent.
constexpr double kChartOverhang = 0.1;

MapChain pin_zero(const MapChain& c) {
  const double v = c.pieces().front().eval_unchecked(0.0);
  if (v == 0) return c;
  std::vector<ChebPiece> pieces = c.pieces();
  pieces.front() = cheb_affine(pieces.front(), 1.0, 0.0, 1.0, -v);
  return MapChain(std::move(pieces), c.nodes());
}

// Derivative of the chain at x, evaluating every piece without domain checks.
double lenient_derivative(const MapChain& c, double x) {
  double v = c.pieces()[0].eval_unchecked(x);
  double d = c.derivatives()[0].eval_unchecked(x);
  for (std::size_t i = 1; i < c.pieces().size(); ++i) {
    d *= 3 * v * v;
    v = v * v * v;
    d *= c.derivatives()[i].eval_unchecked(v);
    v = c.pieces()[i].eval_unchecked(v);
  }
  return d;
}

// c(x) = c(0) + k x^3 + O(x^4) when the first piece vanishes at 0.
double cubic_coefficient(const MapChain& c) {
  const double s = c.derivatives()[0].eval_unchecked(0.0);
  double d = s * s * s, v = 0;
  for (std::size_t i = 1; i < c.pieces().size(); ++i) {
    if (i > 1) {
      d *= 3 * v * v;
      v = v * v * v;
    }
    d *= c.derivatives()[i].eval_unchecked(v);
    v = c.pieces()[i].eval_unchecked(v);
  }
  return d;
}

// D_0 + eps x (1 - x / b) with b the far end of D_0's domain: the slope at 0
// moves while both ends of the first stage stay in place.
MapChain bend_first_piece(const MapChain& c, double eps) {
  std::vector<ChebPiece> pieces = c.pieces();
  const ChebPiece& d0 = pieces.front();
  const double b = std::abs(d0.domain().lo) > std::abs(d0.domain().hi) ? d0.domain().lo : d0.domain().hi;
  pieces.front() = cheb_fit([&](double x) { return d0.eval_unchecked(x) + eps * x * (1 - x / b); }, d0.domain(),
                            d0.degree(), Monotone::increasing);
  return MapChain(std::move(pieces), c.nodes());
}

std::vector<int> piece_degrees(const MapChain& c) {
  std::vector<int> out;
  for (const auto& p : c.pieces()) out.push_back(p.degree());
  return out;
}

MapChain chain_on_template(const MapChain& tmpl, const Eigen::VectorXd& v, int& at) {
  std::vector<ChebPiece> pieces;
  for (const auto& t : tmpl.pieces()) {
    const int n = t.degree() + 1;
    pieces.emplace_back(t.domain(), v.segment(at, n), Monotone::increasing);
    at += n;
  }
  return MapChain(std::move(pieces), tmpl.nodes());
}

void coordinates_on_template(const MapChain& tmpl, const MapChain& c, Eigen::VectorXd& v, int& at) {
  if (c.node_count() != tmpl.node_count())
    throw StructuralError("chart: node count " + std::to_string(c.node_count()) + " differs from template " +
                          std::to_string(tmpl.node_count()));
  for (std::size_t i = 0; i < tmpl.pieces().size(); ++i) {
    const ChebPiece& t = tmpl.pieces()[i];
    const ChebPiece& p = c.pieces()[i];
    const int n = t.degree() + 1;
    if (p.domain() == t.domain()) {
      v.segment(at, n) = cheb_refit(p, t.degree()).coeffs();
    } else {
      v.segment(at, n) = cheb_restrict(p, t.domain(), t.degree(), kChartOverhang).coeffs();
    }
    at += n;
  }
}

}  // namespace

OperatorChart::OperatorChart(const CommutingPair& tmpl, int period, const ChartOptions& opt)
    : period_(period), opt_(opt) {
  if (period < 1) throw DomainError("OperatorChart: period must be >= 1");
  tmpl_.eta = chain_canonicalize(tmpl.eta, opt.degree);
  tmpl_.xi = chain_canonicalize(tmpl.xi, opt.degree);
  tmpl_.provenance = tmpl.provenance;
  CommutingPair q = tmpl_;
  for (int k = 0; k < period; ++k) {
    const Height h = height(q);
    if (h.infinite) throw NotRenormalizableError("chart template has infinite height");
    heights_.push_back(h.value);
    if (k + 1 < period) q = renormalize(q, pair_options(), h.value);
  }
  dim_ = chain_dimension(piece_degrees(tmpl_.eta)) + chain_dimension(piece_degrees(tmpl_.xi));
}

PairOptions OperatorChart::pair_options() const {
  PairOptions o;
  o.degree = opt_.degree;
  o.compat = opt_.compat;
  return o;
}

CommutingPair OperatorChart::project(CommutingPair p) const {
  p.eta = pin_zero(p.eta);
  p.xi = pin_zero(p.xi);
  if (opt_.glue_projection) {
    // Matching conditions of commuting germs at 0: values ξ(η(0)) = η(ξ(0))
    // and cubic terms ξ'(η(0)) k_η = η'(ξ(0)) k_ξ. Unknowns: an output shift
    // d of ξ and a bend μ of its first piece.
    const double e0 = chain_eval_lenient(p.eta, 0.0);
    const double k_eta = cubic_coefficient(p.eta);
    const bool jet = opt_.jet_projection;
    auto xi_of = [&](double d, double mu) {
      return chain_shift_output(jet && mu != 0 ? bend_first_piece(p.xi, mu) : p.xi, d);
    };
    auto defect = [&](double d, double mu) {
      const MapChain xi = xi_of(d, mu);
      const double x0 = chain_eval_lenient(xi, 0.0);
      Eigen::Vector2d r;
      r(0) = chain_eval_lenient(xi, e0) - chain_eval_lenient(p.eta, x0);
      r(1) = jet ? std::log(lenient_derivative(xi, e0) * k_eta /
                            (lenient_derivative(p.eta, x0) * cubic_coefficient(xi)))
                 : 0.0;
      return r;
    };
    double d = 0, mu = 0;
    Eigen::Vector2d r = defect(d, mu);

    for (int it = 0; it < 20 && r.lpNorm<Eigen::Infinity>() > 1e-14; ++it) {
      if (!r.allFinite()) throw NumericalError("gluing projection: non-finite defect");
      const double step = 1e-7;
      Eigen::Matrix2d jac;
      jac.col(0) = (defect(d + step, mu) - defect(d - step, mu)) / (2 * step);
      jac.col(1) = jet ? Eigen::Vector2d((defect(d, mu + step) - defect(d, mu - step)) / (2 * step))
                       : Eigen::Vector2d(0, 1);
      if (!jet) r(1) = 0;
      Eigen::Vector2d delta = jac.fullPivLu().solve(-r);
      if (!delta.allFinite() || std::abs(jac.determinant()) < 1e-14)
        throw NumericalError("gluing projection: singular defect");
      Eigen::Vector2d trial = defect(d + delta(0), mu + delta(1));
      for (int half = 0; half < 8 && !trial.allFinite(); ++half) {
        delta /= 2;
        trial = defect(d + delta(0), mu + delta(1));
      }
      d += delta(0);
      mu += delta(1);
      r = trial;
    }
    if (d != 0 || mu != 0) p.xi = xi_of(d, mu);
  }
  const double x0 = chain_eval_lenient(p.xi, 0.0);
  const double e0 = chain_eval_lenient(p.eta, 0.0);
  p.eta = chain_restrict(p.eta, Interval::spanning(0.0, x0), kChartOverhang);
  p.xi = chain_restrict(p.xi, Interval::spanning(e0, 0.0), kChartOverhang);
  return p;
}

Eigen::VectorXd OperatorChart::to_coordinates(const CommutingPair& p) const {
  Eigen::VectorXd v(dim_);
  int at = 0;
  coordinates_on_template(tmpl_.eta, p.eta, v, at);
  coordinates_on_template(tmpl_.xi, p.xi, v, at);
  return v;
}

CommutingPair OperatorChart::from_coordinates(const Eigen::VectorXd& v) const {
  if (v.size() != dim_)
    throw ShapeError("chart: expected " + std::to_string(dim_) + " coordinates, got " + std::to_string(v.size()));
  CommutingPair p;
  int at = 0;
  p.eta = chain_on_template(tmpl_.eta, v, at);
  p.xi = chain_on_template(tmpl_.xi, v, at);
  p.provenance = tmpl_.provenance;
  return project(std::move(p));
}

CommutingPair OperatorChart::renormalize_frozen(const CommutingPair& p) const {
  CommutingPair q = p;
  for (int k = 0; k < period_; ++k) q = renormalize(q, pair_options(), heights_[k]);
  return q;
}

Eigen::VectorXd OperatorChart::apply(const Eigen::VectorXd& v) const {
  return to_coordinates(project(renormalize_frozen(from_coordinates(v))));
}

Eigen::MatrixXd jacobian_fd(const OperatorChart& chart, const Eigen::VectorXd& point, double h, int threads) {
  const int n = chart.dim();
  if (point.size() != n) throw ShapeError("jacobian_fd: point has the wrong dimension");
  Eigen::MatrixXd jac(n, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto column = [&](int j) {
    double step = h * std::max(1.0, std::abs(point(j)));
    for (int attempt = 0; attempt < 2; ++attempt, step /= 2) {
      try {
        Eigen::VectorXd up = point, down = point;
        up(j) += step;
        down(j) -= step;
        jac.col(j) = (chart.apply(up) - chart.apply(down)) / (2 * step);
        return;
      } catch (const Error& e) {
        if (attempt == 1) throw ColumnError(j, e.what());
      }
    }
  };
  auto worker = [&]() {
    for (int j = next++; j < n; j = next++) {
      try {
        column(j);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nt = std::clamp(nt, 1, n);
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return jac;
}

SpectralReport spectrum(const Eigen::MatrixXd& j, double margin) {
  if (j.rows() != j.cols()) throw ShapeError("spectrum: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(j, false);
  if (es.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
  SpectralReport r;
  r.margin = margin;
  for (int k = 0; k < es.eigenvalues().size(); ++k) r.eigenvalues.push_back(es.eigenvalues()(k));
  std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](const auto& a, const auto& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  for (const auto& e : r.eigenvalues) {
    const double m = std::abs(e);
    if (m > 1 + margin) ++r.unstable_count;
    else if (m >= 1 - margin) r.neutral_band.push_back(e);
  }
  return r;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> leading_eigenvectors(const Eigen::MatrixXd& j) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(j, true);
  if (es.info() != Eigen::Success) throw NumericalError("leading_eigenvectors: eigensolver failed");
  std::vector<int> order(es.eigenvalues().size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b)); });
  const Eigen::VectorXcd v0 = es.eigenvectors().col(order[0]);
  Eigen::VectorXd a, b;
  if (std::abs(es.eigenvalues()(order[0]).imag()) > 0) {
    // A complex pair spans a real invariant plane.
    a = v0.real();
    b = v0.imag();
  } else {
    a = v0.real();
    b = es.eigenvectors().col(order[1]).real();
  }
  return {a.normalized(), b.normalized()};
}

ConvergenceResult fit_log_linear(const std::vector<int>& n, const std::vector<double>& d) {
  if (n.size() != d.size() || n.size() < 2) throw DomainError("fit_log_linear: need two or more points");
  const double m = static_cast<double>(n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (!(d[k] > 0)) throw DomainError("fit_log_linear: distances must be positive");
    const double x = n[k], y = std::log(d[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
  ConvergenceResult r;
  r.levels = n;
  r.distances = d;
  const double slope = cxy / vx;
  r.intercept = (sy - slope * sx) / m;
  r.rate = std::exp(slope);
  r.r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return r;
}

ConvergenceResult convergence_experiment(const CircleLift& f1, const CircleLift& f2, int n_min, int n_max,
                                         int degree) {
  if (n_min < 0 || n_max < n_min + 1) throw DomainError("convergence_experiment: need n_min < n_max");
  const int depth = n_max + 4;
  const auto d1 = digits_from_returns(closest_returns(f1, depth)).digits(depth);
  const auto d2 = digits_from_returns(closest_returns(f2, depth)).digits(depth);
  if (d1 != d2) throw SetupError("convergence_experiment: rotation numbers differ");
  const auto s1 = signature_delta(f1, 200000), s2 = signature_delta(f2, 200000);
  if (std::abs(s1.refined - s2.refined) > std::max(1e-3, 2 * (s1.error + s2.error)))
    throw SetupError("convergence_experiment: delta differs");

  PairOptions opt;
  opt.degree = degree;
  std::vector<int> levels;
  std::vector<double> dist;
  for (int n = n_min; n <= n_max; ++n) {
    const auto p1 = normalize(extract_pair(f1, n, degree), opt);
    const auto p2 = normalize(extract_pair(f2, n, degree), opt);
    levels.push_back(n);
    dist.push_back(pair_distance(p1, p2));
  }
  bool positive = true;
  for (double d : dist) positive = positive && d > 0;
  if (!positive) {
    ConvergenceResult r;
    r.levels = levels;
    r.distances = dist;
    return r;
  }
  return fit_log_linear(levels, dist);
}

std::vector<BoundsRecord> real_bounds_monitor(const CircleLift& f, int n_min, int n_max, int degree) {
  PairOptions opt;
  opt.degree = degree;
  std::vector<BoundsRecord> out;
  for (int n = n_min; n <= n_max; ++n) {
    const auto p = normalize(extract_pair(f, n, degree), opt);
    BoundsRecord r{n, std::abs(p.eta0()), 0.0};
    const Interval& dom = p.eta.domain();
    for (int k = 0; k <= 256; ++k)
      r.c1norm = std::max(r.c1norm, std::abs(chain_derivative_at(p.eta, dom.lo + dom.length() * k / 256.0)));
    out.push_back(r);
  }
  return out;
}

BoundsWindow bounds_window(const std::vector<BoundsRecord>& rec, int n_min, int n_max) {
  BoundsWindow w{INFINITY, -INFINITY, INFINITY, -INFINITY};
  for (const auto& r : rec) {
    if (r.n < n_min || r.n > n_max) continue;
    w.ratio_lo = std::min(w.ratio_lo, r.ratio);
    w.ratio_hi = std::max(w.ratio_hi, r.ratio);
    w.c1_lo = std::min(w.c1_lo, r.c1norm);
    w.c1_hi = std::max(w.c1_hi, r.c1norm);
  }
  return w;
}

RefineReport fixed_point_refine(const CircleLift& seed, const RefineOptions& opt) {
  PairOptions popt;
  popt.degree = opt.degree;
  std::vector<CommutingPair> hist{normalize(extract_pair(seed, opt.level, opt.degree), popt)};
  RefineReport rep;
  // The plain iteration drifts off along the unstable directions once the
  // stable part has settled, so the Newton start is the iterate closest to
  // its own image rather than the last one.
  std::size_t best = hist.size() - 1;
  double best_dist = INFINITY;
  for (int k = 0; k < opt.iterations; ++k) {
    try {
      hist.push_back(renormalize(hist.back(), popt));
    } catch (const Error&) {
      if (best_dist == INFINITY) throw;
      break;
    }
    const std::size_t n = hist.size();
    if (n > static_cast<std::size_t>(opt.period)) {
      double d = INFINITY;
      try {
        d = pair_distance(hist[n - 1 - opt.period], hist[n - 1]);
      } catch (const IncomparableError&) {
      }
      rep.distances.push_back(d);
      if (d < best_dist) {
        best_dist = d;
        best = n - 1 - opt.period;
      }
    }
  }
  rep.pair = best_dist < INFINITY ? hist[best] : hist.back();
  if (!opt.newton) {
    const auto next = [&] {
      CommutingPair q = rep.pair;
      for (int k = 0; k < opt.period; ++k) q = renormalize(q, popt);
      return q;
    }();
    rep.residual = pair_distance(next, rep.pair);
    rep.converged = rep.residual < 1e-6;
    return rep;
  }

  ChartOptions copt;
  copt.degree = opt.degree;
  const OperatorChart chart(rep.pair, opt.period, copt);
  Eigen::VectorXd v = chart.to_coordinates(chart.from_coordinates(chart.to_coordinates(chart.templ())));
  Eigen::VectorXd r = chart.apply(v) - v;
  for (int s = 0; s < opt.newton_steps; ++s) {
    const double res = r.lpNorm<Eigen::Infinity>();
    rep.newton_residuals.push_back(res);
    if (res < opt.newton_tol) break;
    rep.jacobian = jacobian_fd(chart, v, opt.h, opt.threads);
    const Eigen::MatrixXd a = rep.jacobian - Eigen::MatrixXd::Identity(chart.dim(), chart.dim());
    Eigen::VectorXd step = a.colPivHouseholderQr().solve(-r);
    if (step.norm() > opt.step_clip) step *= opt.step_clip / step.norm();
    bool accepted = false;
    for (int half = 0; half < 6 && !accepted; ++half, step /= 2) {
      try {
        const Eigen::VectorXd trial = v + step;
        const Eigen::VectorXd rt = chart.apply(trial) - trial;
        if (rt.lpNorm<Eigen::Infinity>() < res || half == 5) {
          v = trial;
          r = rt;
          accepted = true;
        }
      } catch (const Error&) {
      }
    }
    if (!accepted) break;
  }
  if (r.lpNorm<Eigen::Infinity>() < rep.newton_residuals.back()) rep.newton_residuals.push_back(r.lpNorm<Eigen::Infinity>());
  rep.jacobian = jacobian_fd(chart, v, opt.h, opt.threads);
  rep.pair = chart.from_coordinates(v);
  rep.residual = pair_distance(chart.from_coordinates(chart.apply(v)), rep.pair);
  rep.converged = rep.residual < 1e-6;
  return rep;
}

std::vector<CollisionRecord> collision_probe(const std::vector<std::vector<Signature>>& orbits,
                                             const RefineOptions& opt, const TuneOptions& tune) {
  std::vector<CollisionRecord> out;
  for (const auto& orbit : orbits) {
    CollisionRecord rec;
    if (orbit.empty()) continue;
    rec.signature = orbit.front();
    try {
      const auto t = tune_trig(orbit.front(), tune);
      RefineOptions o = opt;
      o.period = static_cast<int>(orbit.size());
      o.iterations = std::max(o.iterations, 2 * o.period);
      o.iterations -= o.iterations % o.period;
      const auto rep = fixed_point_refine(trig_lift(t.params), o);
      rec.residual = rep.residual;
      rec.unstable_count = spectrum(rep.jacobian).unstable_count;
      const auto [a, b] = leading_eigenvectors(rep.jacobian);
      rec.angle = std::acos(std::min(1.0, std::abs(a.dot(b))));
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace bicubic
