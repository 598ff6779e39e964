#include "bicubic/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

namespace bicubic {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// s(u) = u Q(u)^{1/3} with Q(u) = ∫_0^1 t^2 G(tu) dt and G(v) = F'(x0+v)/v^2,
// so that F(x0 + u) - F(x0) = s(u)^3.
class CriticalFactor {
public:
  CriticalFactor(const CircleLift& f, int which) : f_(&f), which_(which) {
    if (f.deriv_over_square) return;
    if (!f.deriv_complex) throw DomainError("critical factor needs deriv_over_square or deriv_complex");
    // Taylor coefficients of F' at the critical point from a circle of radius R.
    const int n = 64;
    const double x0 = f.crit[which];
    std::vector<std::complex<double>> w(n);
    for (int k = 0; k < n; ++k) w[k] = f.deriv_complex(x0 + std::polar(kRadius, kTwoPi * k / n));
    taylor_.assign(n / 2, 0.0);
    for (int m = 2; m < n / 2; ++m) {
      std::complex<double> acc = 0;
      for (int k = 0; k < n; ++k) acc += w[k] * std::polar(1.0, -kTwoPi * k * m / n);
      taylor_[m] = acc.real() / n / std::pow(kRadius, m);
    }
  }

  double g(double v) const {
    if (f_->deriv_over_square) return f_->deriv_over_square(which_, v);
    if (std::abs(v) < kRadius / 2) {
      double acc = 0;
      for (std::size_t m = taylor_.size(); m-- > 2;) acc = acc * v + taylor_[m];
      return acc;
    }
    return f_->deriv(f_->crit[which_] + v) / (v * v);
  }

  double operator()(double u) const {
    const double q = boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double t) { return t * t * g(t * u); }, 0.0, 1.0);
    if (!(q > 0)) throw MonotonicityError("critical point is not cubic (Q <= 0)");
    return u * std::cbrt(q);
  }

private:
  static constexpr double kRadius = 0.05;
  const CircleLift* f_;
  int which_;
  std::vector<double> taylor_;
};

LiftPoint to_lift(double x) {
  const double n = std::floor(x);
  return LiftPoint{static_cast<std::int64_t>(n), x - n};
}

LiftPoint iterate_point(const CircleLift& f, LiftPoint x, std::int64_t k) {
  for (std::int64_t i = 0; i < k; ++i) x = lift_step(f, x);
  return x;
}

// x - (k + r0) for x a lift point, without forming large sums.
double offset(const LiftPoint& x, std::int64_t k, double r0) { return static_cast<double>(x.n - k) + (x.r - r0); }

// Chain for F^N - P on the interval between 0 and `end`, one piece per run of
// orbit steps between passages through critical points.
MapChain orbit_chain(const CircleLift& f, const std::array<CriticalFactor, 2>& s, double end, std::int64_t N,
                     std::int64_t P, int degree) {
  struct Start {
    std::int64_t step = 0;
    bool shifted = false;
    LiftPoint base;  // F(x0) of the previous critical passage
  };
  auto input = [](const Start& st, double v) {
    if (!st.shifted) return to_lift(v);
    LiftPoint p = st.base;
    p.r += v;
    const double fl = std::floor(p.r);
    p.n += static_cast<std::int64_t>(fl);
    p.r -= fl;
    return p;
  };

  std::vector<ChebPiece> pieces;
  std::vector<NodeMeta> nodes;
  Interval dom = Interval::spanning(0.0, end);
  Start st;
  double a = dom.lo, b = dom.hi;  // F^j of the endpoints, lift coordinates
  for (std::int64_t j = 0; j < N; ++j) {
    int hit = -1;
    std::int64_t hit_k = 0;
    for (int which = 0; which < 2; ++which) {
      const double cr = f.crit[which];
      for (double k = std::ceil(a - cr); k + cr <= b; k += 1) {
        if (hit >= 0) throw CollisionError("both critical points met at orbit step " + std::to_string(j));
        hit = which;
        hit_k = static_cast<std::int64_t>(k);
      }
    }
    if (hit >= 0) {
      const double cr = f.crit[hit];
      const std::int64_t steps = j - st.step;
      const CriticalFactor& sf = s[hit];
      auto g = [&, st, steps](double v) { return sf(offset(iterate_point(f, input(st, v), steps), hit_k, cr)); };
      auto piece = cheb_fit(g, dom, degree, Monotone::increasing);
      const double lo = g(dom.lo), hi = g(dom.hi);
      pieces.push_back(std::move(piece));
      NodeMeta meta;
      meta.origin = hit == 0 ? "0" : "c";
      meta.iterate = static_cast<int>(j);
      nodes.push_back(meta);
      dom = Interval(lo * lo * lo, hi * hi * hi);
      st.step = j + 1;
      st.shifted = true;
      st.base = lift_step(f, to_lift(static_cast<double>(hit_k) + cr));
    }
    a = f.eval(a);
    b = f.eval(b);
  }
  const std::int64_t steps = N - st.step;
  auto g = [&, st, steps](double v) { return offset(iterate_point(f, input(st, v), steps), P, 0.0); };
  pieces.push_back(cheb_fit(g, dom, degree, Monotone::increasing));
  return MapChain(std::move(pieces), std::move(nodes));
}

bool near_zero(double x, double scale) { return std::abs(x) <= 1e-9 * scale; }

}  // namespace

double CommutingPair::eta0() const { return chain_eval(eta, 0.0); }
double CommutingPair::xi0() const { return chain_eval(xi, 0.0); }

double critical_factor(const CircleLift& f, int which, double u) {
  if (which != 0 && which != 1) throw DomainError("critical_factor: which must be 0 or 1");
  return CriticalFactor(f, which)(u);
}

CommutingPair extract_pair(const CircleLift& f, int n, int degree) {
  if (n < 0) throw DomainError("extract_pair: level must be >= 0");
  const auto cr = closest_returns(f, n + 1);
  if (static_cast<int>(cr.size()) < n + 2)
    throw DepthError("extract_pair: closest return " + std::to_string(n + 1) + " not reached");
  const std::array<CriticalFactor, 2> s{CriticalFactor(f, 0), CriticalFactor(f, 1)};
  CommutingPair out;
  const auto& rn = cr[n];
  const auto& rn1 = cr[n + 1];
  out.eta = chain_canonicalize(orbit_chain(f, s, rn.d, rn1.q, rn1.p, degree), degree);
  out.xi = chain_canonicalize(orbit_chain(f, s, rn1.d, rn.q, rn.p, degree), degree);
  out.provenance.family = f.family;
  out.provenance.params = f.params;
  out.provenance.level = n;
  return out;
}

PairReport pair_validate(const CommutingPair& p, double tol) {
  PairReport r;
  const double e0 = p.eta0(), x0 = p.xi0();
  const double len_eta = p.eta.domain().length(), len_xi = p.xi.domain().length();
  const double scale = std::max(len_eta, len_xi);

  r.straddles_zero = e0 * x0 < 0 && near_zero(p.eta.domain().excess(0.0), scale) &&
                     near_zero(p.xi.domain().excess(0.0), scale);
  if (!r.straddles_zero) r.messages.push_back("eta(0) and xi(0) do not straddle 0");

  auto cubic_at_zero = [&](const MapChain& c) {
    for (const auto& cp : chain_critical_points(c))
      if (near_zero(cp.location, c.domain().length()) && cp.order == 3) return true;
    return false;
  };
  r.critical_at_zero = cubic_at_zero(p.eta) && cubic_at_zero(p.xi);
  if (!r.critical_at_zero) r.messages.push_back("0 is not a cubic critical point of both maps");

  const double s = x0 > 0 ? 1.0 : -1.0;
  const double w = 0.01 * std::min(len_eta, len_xi);
  double worst = 0;
  for (int k = 0; k <= 32; ++k) {
    const double x = s * (-w + 2 * w * k / 32.0);
    try {
      const double a = chain_eval_lenient(p.eta, chain_eval_lenient(p.xi, x));
      const double b = chain_eval_lenient(p.xi, chain_eval_lenient(p.eta, x));
      worst = std::max(worst, std::abs(a - b));
    } catch (const Error& e) {
      worst = std::numeric_limits<double>::infinity();
      r.messages.push_back(std::string("commutation probe failed: ") + e.what());
      break;
    }
  }
  r.commutation_residual = worst;
  r.commutes = worst <= tol * scale;
  if (!r.commutes) r.messages.push_back("commutation residual " + std::to_string(worst));

  try {
    const double xe = chain_eval(p.xi, e0);
    r.gluing_residual = std::abs(xe - chain_eval(p.eta, x0));
    r.glues = p.eta.domain().contains(xe, 1e-12);
  } catch (const Error& e) {
    r.messages.push_back(std::string("gluing check failed: ") + e.what());
  }
  if (!r.glues) r.messages.push_back("xi(eta(0)) leaves the domain of eta");

  r.ok = r.straddles_zero && r.critical_at_zero && r.commutes && r.glues;
  return r;
}

Height height(const CommutingPair& p, int cap) {
  double x = p.xi0();
  const double side = x > 0 ? 1.0 : -1.0;
  for (int a = 0; a <= cap; ++a) {
    const double y = chain_eval(p.eta, x);
    if (side * y <= 0) return Height{a, false};
    x = y;
  }
  return Height{cap, true};
}

CommutingPair prerenormalize(const CommutingPair& p, const PairOptions& opt, int a) {
  if (a <= 0) {
    const Height h = height(p, opt.height_cap);
    if (h.infinite) throw NotRenormalizableError("height exceeds " + std::to_string(opt.height_cap));
    a = h.value;
  }
  if (a < 1) throw NotRenormalizableError("height 0: eta(xi(0)) already crosses 0");
  MapChain composed = p.xi;
  for (int k = 0; k < a; ++k) composed = chain_compose(p.eta, composed, opt.degree, opt.compat);
  CommutingPair out;
  out.eta = chain_canonicalize(composed, opt.degree, opt.chain);
  const double end = chain_eval(out.eta, 0.0);
  out.xi = chain_canonicalize(chain_restrict(p.eta, Interval::spanning(0.0, end), opt.compat), opt.degree, opt.chain);
  out.provenance = p.provenance;
  return out;
}

CommutingPair normalize(const CommutingPair& p, const PairOptions& opt) {
  const double lambda = p.xi0();
  CommutingPair out;
  out.eta = chain_canonicalize(chain_conjugate_scale(p.eta, lambda), opt.degree, opt.chain);
  out.xi = chain_canonicalize(chain_conjugate_scale(p.xi, lambda), opt.degree, opt.chain);
  out.provenance = p.provenance;
  return out;
}

CommutingPair renormalize(const CommutingPair& p, const PairOptions& opt, int frozen_height) {
  const Height h = height(p, opt.height_cap);
  if (h.infinite) throw NotRenormalizableError("height exceeds " + std::to_string(opt.height_cap));
  if (frozen_height > 0 && h.value != frozen_height) throw HeightFlipError(frozen_height, h.value);
  CommutingPair out = normalize(prerenormalize(p, opt, h.value), opt);
  ++out.provenance.renormalizations;
  return out;
}

GluedMap::GluedMap(const CommutingPair& p) : p_(&p), s_(p.orientation()) {
  left_ = s_ * p.eta0();
  right_ = s_ * chain_eval(p.xi, p.eta0());
  crit_ = std::numeric_limits<double>::quiet_NaN();

  auto nonzero = [&](const MapChain& c) {
    std::vector<double> out;
    for (const auto& cp : chain_critical_points(c))
      if (!near_zero(cp.location, c.domain().length())) out.push_back(s_ * cp.location);
    return out;
  };
  const auto ce = nonzero(p.eta);
  const auto cx = nonzero(p.xi);
  if (ce.size() + cx.size() != 1) {
    degenerate_ = true;
    return;
  }
  if (!cx.empty()) {
    crit_ = cx.front();
  } else if (ce.front() <= right_) {
    crit_ = ce.front();
  } else {
    crit_ = s_ * chain_solve(p.xi, p.xi.node_count(), s_ * ce.front());
  }
}

double GluedMap::operator()(double x) const {
  const double u = s_ * x;
  double y = x >= 0 ? chain_eval(p_->eta, u) : chain_eval(p_->eta, chain_eval(p_->xi, u));
  y *= s_;
  if (y > right_) y -= length();
  if (y < left_) y += length();
  return y;
}

std::vector<double> glued_orbit(const CommutingPair& p, double x0, long n) {
  const GluedMap g(p);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, n)));
  double x = x0;
  for (long k = 0; k < n; ++k) {
    out.push_back(x);
    x = g(x);
  }
  return out;
}

namespace {

// The glued map as a circle lift in θ = -x / length, so that leftward motion
// increases θ and x = 0 sits at θ = 0.
CircleLift glued_lift(const GluedMap& g) {
  CircleLift f;
  const double len = g.length(), left = g.left();
  auto to_x = [=](double r) {
    double x = -r * len;
    if (x < left) x += len;
    return x;
  };
  auto to_theta = [=](double x) { return x <= 0 ? -x / len : 1 - x / len; };
  f.eval = [=, &g](double t) {
    const double n = std::floor(t);
    const double r = t - n;
    double step = to_theta(g(to_x(r))) - r;
    if (step < 0) step += 1;
    return t + step;
  };
  f.crit = {0.0, std::isnan(g.critical()) ? 0.5 : to_theta(g.critical())};
  f.family = "glued";
  return f;
}

}  // namespace

PairSignature pair_signature(const CommutingPair& p, long n, int depth, const PairOptions& opt) {
  PairSignature out;
  std::vector<int> digits;
  CommutingPair q = p;
  for (int k = 0; k < depth; ++k) {
    const Height h = height(q, opt.height_cap);
    if (h.infinite) break;
    digits.push_back(h.value);
    if (k + 1 < depth) q = renormalize(q, opt, h.value);
  }
  const GluedMap g(p);
  out.order9 = g.degenerate();
  const CircleLift f = glued_lift(g);
  const auto rot = rotation_number(f, RotationMethod::iterate, n);
  out.rho_wraps = rot.value;
  out.signature.rho = ContinuedFraction::finite(digits);
  out.signature.rho.depth_truncated = true;
  if (out.order9) {
    out.signature.delta = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const auto d = signature_delta(f, n);
  out.signature.delta = d.refined;
  out.delta_error = d.error;
  return out;
}

double pair_distance(const CommutingPair& a, const CommutingPair& b) {
  auto sup = [](const MapChain& x, const MapChain& y) {
    const double lo = std::max(x.domain().lo, y.domain().lo);
    const double hi = std::min(x.domain().hi, y.domain().hi);
    if (!(hi > lo)) throw IncomparableError("pair_distance: domains do not overlap");
    double worst = 0;
    for (int k = 0; k <= 128; ++k) {
      const double t = lo + (hi - lo) * k / 128.0;
      worst = std::max(worst, std::abs(chain_eval_lenient(x, t) - chain_eval_lenient(y, t)));
    }
    return worst;
  };
  return sup(a.eta, b.eta) + sup(a.xi, b.xi) + std::abs(a.eta0() - b.eta0());
}

RotationResult rotation_number_heights(const CircleLift& f, int depth, int degree) {
  if (depth < 1) throw DomainError("rotation_number_heights: depth must be >= 1");
  // The lowest levels may hold both critical points in one interval; start
  // at the first level that extracts and read the earlier digits from the
  // closest returns.
  PairOptions opt;
  opt.degree = degree;
  std::vector<int> digits;
  CommutingPair p;
  for (int n = 0;; ++n) {
    const auto cr = closest_returns(f, n + 1);
    if (static_cast<int>(cr.size()) < n + 2) throw RationalRotationError("closest returns stall");
    digits = digits_from_returns(cr).digits(n + 1);
    if (static_cast<int>(digits.size()) >= depth) break;
    try {
      p = normalize(extract_pair(f, n, degree), opt);
      break;
    } catch (const CollisionError&) {
      if (n >= 8) throw;
    }
  }
  while (static_cast<int>(digits.size()) < depth) {
    const Height h = height(p, opt.height_cap);
    if (h.infinite) throw RationalRotationError("infinite height after " + std::to_string(digits.size()) + " digits");
    digits.push_back(h.value);
    if (static_cast<int>(digits.size()) < depth) p = renormalize(p, opt, h.value);
  }
  digits.resize(depth);
  RotationResult out;
  out.cf = ContinuedFraction::finite(digits);
  out.cf.depth_truncated = true;
  out.value = cf_value<double>(out.cf, depth);
  const auto conv = convergent_list(out.cf, depth);
  const double qk = static_cast<double>(conv.back().q);
  const double qk1 = static_cast<double>(conv[conv.size() - 2].q);
  out.error = 1.0 / (qk * qk1);
  return out;
}

}  // namespace bicubic
