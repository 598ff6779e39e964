#include "bicubic/families.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bicubic {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

// sin(πu)/u, continuous at 0.
double sinc_pi(double u) { return std::abs(u) < 1e-8 ? kPi * (1 - kPi * kPi * u * u / 6) : std::sin(kPi * u) / u; }

// Fourier coefficients indexed k = -n..n stored at k + n.
std::vector<cd> convolve(const std::vector<cd>& a, const std::vector<cd>& b) {
  std::vector<cd> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

CircleLift trig_lift(const TrigParams& prm) {
  const double c = prm.c, eps = prm.shape, omega = prm.omega;
  if (!(c > 0 && c < 1)) throw DomainError("trig_lift: c must lie in (0,1)");
  if (!(std::abs(eps) < 1)) throw DomainError("trig_lift: |shape| must be < 1");
  const cd ec = std::polar(1.0, kTwoPi * c);
  const std::vector<cd> f1{-0.5, 1.0, -0.5};
  const std::vector<cd> f2{-0.5 * ec, 1.0, -0.5 * std::conj(ec)};
  const std::vector<cd> w{cd(0, eps / 2), 1.0, cd(0, -eps / 2)};
  const auto a = convolve(convolve(f1, f2), w);  // k = -3..3
  const double a0 = a[3].real();
  const double K = 1.0 / a0;
  // Coefficients of the periodic part of the antiderivative for k = 1..3.
  std::array<cd, 3> b;
  for (int k = 1; k <= 3; ++k) b[k - 1] = a[3 + k] / cd(0, kTwoPi * k);

  CircleLift f;
  f.family = "trig";
  f.params = {omega, c, eps};
  f.crit = {0.0, c};
  if (c < 1e-6 || c > 1 - 1e-6) f.warnings.push_back("critical points nearly collide (c near 0 or 1)");

  f.eval = [=](double x) {
    const double n = std::floor(x);
    const double r = x - n;
    const cd e = std::polar(1.0, kTwoPi * r);
    cd ek = e, s = 0.0;
    for (int k = 0; k < 3; ++k) {
      s += b[k] * (ek - 1.0);
      ek *= e;
    }
    return n + omega + K * (a0 * r + 2 * s.real());
  };
  f.deriv = [=](double x) {
    return K * (1 - std::cos(kTwoPi * x)) * (1 - std::cos(kTwoPi * (x - c))) * (1 + eps * std::sin(kTwoPi * x));
  };
  f.deriv_complex = [=](cd z) {
    return K * (1.0 - std::cos(kTwoPi * z)) * (1.0 - std::cos(kTwoPi * (z - c))) * (1.0 + eps * std::sin(kTwoPi * z));
  };
  f.deriv_over_square = [=](int which, double u) {
    const double s2 = 2 * sinc_pi(u) * sinc_pi(u);
    if (which == 0) return K * s2 * (1 - std::cos(kTwoPi * (u - c))) * (1 + eps * std::sin(kTwoPi * u));
    return K * (1 - std::cos(kTwoPi * (c + u))) * s2 * (1 + eps * std::sin(kTwoPi * (c + u)));
  };
  return f;
}

// ---------------------------------------------------------------------------
// Blaschke family

namespace {

struct PoissonTerm {
  double r;     // 1/|p|
  double beta;  // -arg p
};

std::array<PoissonTerm, 2> poisson_terms(const BlaschkeParams& b) {
  return {PoissonTerm{1 / std::abs(b.p), -std::arg(b.p)}, PoissonTerm{1 / std::abs(b.q), -std::arg(b.q)}};
}

double poisson(const PoissonTerm& t, double theta) {
  const double psi = kTwoPi * theta + t.beta;
  return (1 - t.r * t.r) / (1 - 2 * t.r * std::cos(psi) + t.r * t.r);
}

// d/dθ of the Poisson term.
double poisson_d(const PoissonTerm& t, double theta) {
  const double psi = kTwoPi * theta + t.beta;
  const double den = 1 - 2 * t.r * std::cos(psi) + t.r * t.r;
  return -(1 - t.r * t.r) * 2 * t.r * std::sin(psi) * kTwoPi / (den * den);
}

double blaschke_deriv(const std::array<PoissonTerm, 2>& terms, double theta) {
  return 3 - poisson(terms[0], theta) - poisson(terms[1], theta);
}

double blaschke_deriv2(const std::array<PoissonTerm, 2>& terms, double theta) {
  return -poisson_d(terms[0], theta) - poisson_d(terms[1], theta);
}

}  // namespace

CircleLift blaschke_raw_lift(const BlaschkeParams& prm) {
  if (!(std::abs(prm.p) > 1 && std::abs(prm.q) > 1)) throw DomainError("blaschke: |p| and |q| must exceed 1");
  const cd up = 1.0 / prm.p, uq = 1.0 / prm.q;
  const double base = prm.t + (std::arg(prm.p) + std::arg(prm.q)) / kPi;
  const auto terms = poisson_terms(prm);
  CircleLift f;
  f.family = "blaschke";
  f.params = {prm.t, prm.p.real(), prm.p.imag(), prm.q.real(), prm.q.imag()};
  f.eval = [=](double x) {
    const double n = std::floor(x);
    const double r = x - n;
    const cd z = std::polar(1.0, kTwoPi * r);
    return n + base + r + (std::arg(1.0 - up * z) + std::arg(1.0 - uq * z)) / kPi;
  };
  f.deriv = [=](double x) { return blaschke_deriv(terms, x); };
  f.deriv_complex = [=](cd z) {
    cd s = 3.0;
    for (const auto& t : terms) s -= (1 - t.r * t.r) / (1.0 - 2 * t.r * std::cos(kTwoPi * z + t.beta) + t.r * t.r);
    return s;
  };
  return f;
}

double blaschke_modulus_defect(const BlaschkeParams& prm, int probes) {
  double worst = 0;
  for (int k = 0; k < probes; ++k) {
    const cd z = std::polar(1.0, kTwoPi * k / probes);
    const cd b = std::polar(1.0, kTwoPi * prm.t) * z * z * z * (z - prm.p) / (1.0 - std::conj(prm.p) * z) *
                 (z - prm.q) / (1.0 - std::conj(prm.q) * z);
    worst = std::max(worst, std::abs(std::abs(b) - 1));
  }
  return worst;
}

BlaschkeValidation blaschke_validate(const BlaschkeParams& prm) {
  const auto terms = poisson_terms(prm);
  BlaschkeValidation v;
  const int n = 4096;
  std::vector<double> d(n);
  for (int k = 0; k < n; ++k) d[k] = blaschke_deriv(terms, double(k) / n);
  v.min_derivative = *std::min_element(d.begin(), d.end());
  for (int k = 0; k < n; ++k) {
    if (d[k] < -1e-9) {
      int e = k;
      while (e + 1 < n && d[e + 1] < -1e-9) ++e;
      v.bad_arcs.emplace_back(double(k) / n, double(e + 1) / n);
      k = e;
    }
  }
  for (int k = 0; k < n; ++k) {
    const double l = d[(k + n - 1) % n], r = d[(k + 1) % n];
    if (!(d[k] <= l && d[k] < r)) continue;
    // Newton on F'' = 0 from the grid minimum.
    double th = double(k) / n;
    for (int it = 0; it < 50; ++it) {
      const double h = 1e-6;
      const double g = blaschke_deriv2(terms, th);
      const double gp = (blaschke_deriv2(terms, th + h) - blaschke_deriv2(terms, th - h)) / (2 * h);
      if (!(gp > 0)) break;
      const double step = g / gp;
      th -= std::clamp(step, -1.0 / n, 1.0 / n);
      if (std::abs(step) < 1e-15) break;
    }
    th -= std::floor(th);
    if (std::abs(blaschke_deriv(terms, th)) < 1e-7) v.critical.push_back(th);
  }
  std::sort(v.critical.begin(), v.critical.end());
  v.bicubic = v.bad_arcs.empty() && v.critical.size() == 2;
  return v;
}

CircleLift blaschke_lift(const BlaschkeParams& prm) {
  const auto v = blaschke_validate(prm);
  if (!v.bicubic) {
    std::string arcs;
    for (const auto& [a, b] : v.bad_arcs) arcs += " [" + std::to_string(a) + "," + std::to_string(b) + "]";
    throw MonotonicityError("blaschke parameters are not bi-cubic: " + std::to_string(v.critical.size()) +
                            " double zeros, negative arcs:" + (arcs.empty() ? " none" : arcs));
  }
  const CircleLift raw = blaschke_raw_lift(prm);
  const double th1 = v.critical[0];
  const double shift = std::floor(raw.eval(th1) - th1);
  CircleLift f = raw;
  f.crit = {0.0, v.critical[1] - th1};
  f.eval = [raw, th1, shift](double x) { return raw.eval(x + th1) - th1 - shift; };
  f.deriv = [raw, th1](double x) { return raw.deriv(x + th1); };
  f.deriv_complex = [raw, th1](cd z) { return raw.deriv_complex(z + th1); };
  return f;
}

// ---------------------------------------------------------------------------
// Orbits

LiftPoint lift_step(const CircleLift& f, LiftPoint x) {
  const double y = f.eval(x.r);
  double m = std::floor(y);
  double r = y - m;
  if (r >= 1) {
    r -= 1;
    m += 1;
  }
  return LiftPoint{x.n + static_cast<std::int64_t>(m), r};
}

double lift_iterate(const CircleLift& f, double x, long k) {
  const double n = std::floor(x);
  LiftPoint p{static_cast<std::int64_t>(n), x - n};
  for (long j = 0; j < k; ++j) p = lift_step(f, p);
  return p.value();
}

std::vector<ClosestReturn> closest_returns(const CircleLift& f, int depth, long q_cap) {
  // Walk the orbit of 0 and test it at the times q_{k-1} + m q_k: the return
  // q_{k+1} is the last of these still on the side of x_{k-1}. This only uses
  // the cyclic order of the orbit, which agrees with the rigid rotation.
  ClosestReturn prev{-1, 0, 1, -1.0};
  ClosestReturn cur{0, 1, 0, f.eval(0.0)};
  std::vector<ClosestReturn> out{cur};
  if (!(cur.d > 0 && cur.d < 1)) throw DomainError("closest_returns: F(0) must lie in (0,1)");
  ClosestReturn last_same = prev;
  std::int64_t m = 0;
  LiftPoint x;
  for (long j = 1; j <= q_cap && cur.k < depth; ++j) {
    x = lift_step(f, x);
    while (j == prev.q + (m + 1) * cur.q) {
      const std::int64_t p = prev.p + (m + 1) * cur.p;
      const double d = static_cast<double>(x.n - p) + x.r;
      if (d == 0) throw RationalRotationError("orbit of 0 is periodic with period " + std::to_string(j));
      if ((d > 0) == (prev.d > 0)) {
        ++m;
        last_same = {cur.k + 1, j, p, d};
        break;
      }
      if (m == 0) throw NumericalError("closest returns lost their order at q=" + std::to_string(j) + " (precision loss)");
      prev = cur;
      cur = last_same;
      out.push_back(cur);
      m = 0;
      if (cur.k >= depth) break;
    }
  }
  return out;
}

ContinuedFraction digits_from_returns(const std::vector<ClosestReturn>& cr) {
  std::vector<int> digits;
  if (cr.size() < 2) return ContinuedFraction::finite({});
  digits.push_back(static_cast<int>(cr[1].q));
  for (std::size_t k = 1; k + 1 < cr.size(); ++k) {
    const std::int64_t num = cr[k + 1].q - cr[k - 1].q;
    if (num % cr[k].q != 0) throw NumericalError("closest-return denominators violate the recursion");
    digits.push_back(static_cast<int>(num / cr[k].q));
  }
  auto cf = ContinuedFraction::finite(digits);
  cf.depth_truncated = true;
  return cf;
}

RotationResult rotation_number_heights(const CircleLift& f, int depth, int degree);

RotationResult rotation_number(const CircleLift& f, RotationMethod method, long depth, int degree) {
  if (method == RotationMethod::heights) return rotation_number_heights(f, static_cast<int>(depth), degree);
  const auto cr = closest_returns(f, 1000, depth);
  if (cr.size() < 3) throw RationalRotationError("too few closest returns; rotation number looks rational");
  const auto& a = cr[cr.size() - 2];
  const auto& b = cr.back();
  RotationResult out;
  const double ra = double(a.p) / double(a.q), rb = double(b.p) / double(b.q);
  out.value = 0.5 * (ra + rb);
  out.error = 0.5 * std::abs(ra - rb);
  out.cf = digits_from_returns(cr);
  return out;
}

DeltaEstimate signature_delta(const CircleLift& f, long n_orbit, double rho) {
  const auto cr = closest_returns(f, 1000, n_orbit);
  if (cr.size() < 3 || cr.back().q * 1000 < n_orbit)
    throw RationalRotationError("closest returns stall; rotation number looks rational");
  // The next return lies beyond the orbit, so |rho - p_K/q_K| < 1/(q_K n) and
  // the conjugacy values {j rho}, j < n, stay within 1/q_K.
  if (rho <= 0) rho = double(cr.back().p) / double(cr.back().q);
  const double c = f.c();
  LiftPoint x;
  long count = 0;
  long i_lo = 0, i_hi = -1;
  double r_lo = 0, r_hi = 1;
  for (long j = 0; j < n_orbit; ++j) {
    if (x.r < c) {
      ++count;
      if (x.r >= r_lo) {
        r_lo = x.r;
        i_lo = j;
      }
    } else if (x.r < r_hi) {
      r_hi = x.r;
      i_hi = j;
    }
    x = lift_step(f, x);
  }
  DeltaEstimate out;
  out.birkhoff = double(count) / double(n_orbit);
  out.error = 3.0 / double(cr.back().q);
  auto h = [&](long j) {
    const long double v = static_cast<long double>(j) * static_cast<long double>(rho);
    return static_cast<double>(v - std::floor(v));
  };
  out.lo = h(i_lo);
  out.hi = i_hi < 0 ? 1.0 : h(i_hi);
  if (out.hi < out.lo) out.hi = out.lo;
  out.refined = out.lo + (out.hi - out.lo) * (c - r_lo) / (r_hi - r_lo);
  return out;
}

std::vector<PartitionElement> dynamical_partition(const CircleLift& f, int n, double tol) {
  const auto cr = closest_returns(f, n + 1);
  if (static_cast<int>(cr.size()) < n + 2) throw DepthError("partition needs closest returns up to k=" + std::to_string(n + 1));
  const std::int64_t qn = cr[n].q, qn1 = cr[n + 1].q, pn = cr[n].p, pn1 = cr[n + 1].p;
  std::vector<LiftPoint> orbit(qn + qn1 + 1);
  for (std::size_t j = 1; j < orbit.size(); ++j) orbit[j] = lift_step(f, orbit[j - 1]);
  std::vector<PartitionElement> parts;
  auto add = [&](const LiftPoint& a, const LiftPoint& b, std::int64_t shift, int fam, long it) {
    // b - shift and a as lift values; length computed with exact integer parts.
    const double diff = double(b.n - shift - a.n) + (b.r - a.r);
    const double lo = diff > 0 ? a.r : a.r + diff;
    const double l = std::floor(lo);
    parts.push_back({lo - l, lo - l + std::abs(diff), fam, it});
  };
  for (std::int64_t i = 0; i < qn1; ++i) add(orbit[i], orbit[i + qn], pn, n, static_cast<long>(i));
  for (std::int64_t j = 0; j < qn; ++j) add(orbit[j], orbit[j + qn1], pn1, n + 1, static_cast<long>(j));

  double total = 0;
  for (const auto& p : parts) total += p.hi - p.lo;
  if (std::abs(total - 1) > tol)
    throw PartitionIntegrityError("partition lengths sum to " + std::to_string(total));
  auto sorted = parts;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double next_lo = k + 1 < sorted.size() ? sorted[k + 1].lo : sorted[0].lo + 1;
    if (sorted[k].hi > next_lo + tol) throw PartitionIntegrityError("partition elements overlap");
  }
  return parts;
}

int partition_locate(const std::vector<PartitionElement>& parts, double x) {
  x -= std::floor(x);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& p = parts[k];
    if ((x > p.lo && x < p.hi) || (x + 1 > p.lo && x + 1 < p.hi)) return static_cast<int>(k);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Tuning

namespace {

// -1: rotation number below the target, +1: above, 0: all convergents up to
// q_cap on the correct side.
int compare_rotation(const CircleLift& f, const std::vector<Convergent>& conv, long q_cap, std::int64_t* q_ok) {
  LiftPoint x;
  std::int64_t j = 0;
  for (std::size_t k = 0; k < conv.size(); ++k) {
    if (conv[k].q > q_cap) break;
    while (j < conv[k].q) {
      x = lift_step(f, x);
      ++j;
    }
    const double d = double(x.n - conv[k].p) + x.r;
    if (k % 2 == 0 && !(d > 0)) return -1;
    if (k % 2 == 1 && !(d < 0)) return 1;
    if (q_ok) *q_ok = conv[k].q;
  }
  return 0;
}

std::vector<Convergent> target_convergents(const ContinuedFraction& rho, long q_cap) {
  std::vector<Convergent> conv{{0, 1}};
  int kmax = std::min(rho.available(), 80);
  try {
    conv = convergent_list(rho, kmax);
  } catch (const DepthError&) {
    for (int k = kmax - 1; k > 0; --k) {
      try {
        conv = convergent_list(rho, k);
        break;
      } catch (const DepthError&) {
      }
    }
  }
  while (conv.size() > 2 && conv[conv.size() - 2].q > q_cap) conv.pop_back();
  return conv;
}

template <class MakeLift>
double bisect_rotation(MakeLift&& make, const ContinuedFraction& rho, long q_cap, std::int64_t* q_matched) {
  const auto conv = target_convergents(rho, q_cap);
  double lo = 0, hi = 1;
  std::int64_t q_ok = 0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    q_ok = 0;
    const int cmp = compare_rotation(make(mid), conv, q_cap, &q_ok);
    if (cmp == 0) {
      lo = hi = mid;
      break;
    }
    (cmp < 0 ? lo : hi) = mid;
  }
  if (q_matched) *q_matched = q_ok;
  return 0.5 * (lo + hi);
}

}  // namespace

double tune_trig_rotation(const ContinuedFraction& rho, double c, double shape, long q_cap, std::int64_t* q_matched) {
  return bisect_rotation([&](double w) { return trig_lift({w, c, shape}); }, rho, q_cap, q_matched);
}

namespace {

// Illinois regula falsi for an increasing function g on [a, b] with target 0.
template <class G>
double illinois(G&& g, double a, double b, double tol, int max_iter, int* iterations, const char* stage) {
  double ga = g(a), gb = g(b);
  int it = 2;
  while (ga > 0 && a > 1e-3) {
    b = a;
    gb = ga;
    a = std::max(1e-3, a - 0.2);
    ga = g(a);
    ++it;
  }
  while (gb < 0 && b < 1 - 1e-3) {
    a = b;
    ga = gb;
    b = std::min(1 - 1e-3, b + 0.2);
    gb = g(b);
    ++it;
  }
  if (ga > 0 || gb < 0) throw StagedSolveError(stage, "target not bracketed");
  double x = a;
  int side = 0;
  for (; it < max_iter; ++it) {
    x = (a * gb - b * ga) / (gb - ga);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    const double gx = g(x);
    if (std::abs(gx) < tol || b - a < 1e-13) break;
    if (gx < 0) {
      a = x;
      ga = gx;
      if (side == -1) gb /= 2;
      side = -1;
    } else {
      b = x;
      gb = gx;
      if (side == 1) ga /= 2;
      side = 1;
    }
  }
  if (iterations) *iterations = it;
  return x;
}

}  // namespace

TuneResult tune_trig(const Signature& target, const TuneOptions& opt) {
  const double rho = target.rho_value();
  TuneResult best;
  double best_err = std::numeric_limits<double>::infinity();
  auto g = [&](double c) {
    std::int64_t q = 0;
    const double w = tune_trig_rotation(target.rho, c, opt.shape, opt.q_cap, &q);
    const auto f = trig_lift({w, c, opt.shape});
    const auto est = signature_delta(f, opt.delta_orbit, rho);
    const double err = est.refined - target.delta;
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best.params = {w, c, opt.shape};
      best.delta_measured = est.refined;
      best.delta_error = std::max(est.hi - est.lo, std::abs(est.birkhoff - est.refined));
      best.q_matched = q;
    }
    return err;
  };
  const bool warm = opt.c_guess > 0 && opt.c_guess < 1;
  const double width = warm ? 1e-4 : 0.1;
  const double centre = warm ? opt.c_guess : target.delta;
  const double a = std::clamp(centre - width, 1e-3, 1 - 1e-3);
  const double b = std::clamp(centre + width, 1e-3, 1 - 1e-3);
  int iterations = 0;
  illinois(g, a, b, opt.delta_tol, opt.max_outer, &iterations, "delta");
  best.outer_iterations = iterations - 1;
  if (best_err > 10 * opt.delta_tol + 1e-6)
    throw ConvergenceError("tune_trig: best delta error " + std::to_string(best_err));
  return best;
}

// ---------------------------------------------------------------------------
// Blaschke signature solver

namespace {

struct InnerSolution {
  double ra, rb, th1, th2;
};

BlaschkeParams blaschke_from(double sigma, double ra, double rb, double t) {
  return BlaschkeParams{t, std::polar(1 / ra, -sigma / 2), std::polar(1 / rb, sigma / 2)};
}

// Double zeros of F' at two points for arg p = -σ/2, arg q = σ/2.
InnerSolution blaschke_inner(double sigma, int max_iter, const InnerSolution* guess) {
  InnerSolution s = guess ? *guess : InnerSolution{0.45, 0.45, -sigma / (4 * kPi), sigma / (4 * kPi)};
  auto residual = [&](const Eigen::Vector4d& u) {
    const auto terms = poisson_terms(blaschke_from(sigma, u(0), u(1), 0));
    return Eigen::Vector4d(blaschke_deriv(terms, u(2)), blaschke_deriv2(terms, u(2)) / kTwoPi,
                           blaschke_deriv(terms, u(3)), blaschke_deriv2(terms, u(3)) / kTwoPi);
  };
  Eigen::Vector4d u(s.ra, s.rb, s.th1, s.th2);
  Eigen::Vector4d r = residual(u);
  for (int it = 0; it < max_iter && r.norm() > 1e-14; ++it) {
    Eigen::Matrix4d jac;
    for (int j = 0; j < 4; ++j) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e(j) = 1e-7;
      jac.col(j) = (residual(u + e) - residual(u - e)) / 2e-7;
    }
    Eigen::Vector4d step = jac.fullPivLu().solve(-r);
    double damp = 1;
    for (int h = 0; h < 30; ++h, damp /= 2) {
      const Eigen::Vector4d trial = u + damp * step;
      if (trial(0) <= 0.01 || trial(0) >= 0.99 || trial(1) <= 0.01 || trial(1) >= 0.99) continue;
      const Eigen::Vector4d rt = residual(trial);
      if (rt.norm() < r.norm() || h == 29) {
        u = trial;
        r = rt;
        break;
      }
    }
  }
  if (!(r.norm() < 1e-10)) throw StagedSolveError("inner", "double-zero solve residual " + std::to_string(r.norm()));
  return {u(0), u(1), u(2), u(3)};
}

}  // namespace

BlaschkeParams blaschke_solve_signature(const ContinuedFraction& rho_cf, double delta, const BlaschkeSolveOptions& opt) {
  if (!(delta > 0 && delta < 1)) throw DomainError("blaschke_solve_signature: delta must lie in (0,1)");
  const double rho = cf_limit<double>(rho_cf);
  BlaschkeParams best;
  double best_err = std::numeric_limits<double>::infinity();
  InnerSolution last{0.45, 0.45, 0, 0};
  bool have_last = false;
  auto g = [&](double x) {
    const double sigma = kTwoPi * x;
    InnerSolution inner;
    try {
      inner = blaschke_inner(sigma, opt.inner_iterations, have_last ? &last : nullptr);
    } catch (const StagedSolveError&) {
      inner = blaschke_inner(sigma, opt.inner_iterations, nullptr);
    }
    last = inner;
    have_last = true;
    std::int64_t q = 0;
    const double t = bisect_rotation(
        [&](double tt) { return blaschke_lift(blaschke_from(sigma, inner.ra, inner.rb, tt)); }, rho_cf,
        opt.middle_q_cap, &q);
    if (q < 10000) throw StagedSolveError("middle", "rotation number matched only to q=" + std::to_string(q));
    const auto prm = blaschke_from(sigma, inner.ra, inner.rb, t);
    const auto est = signature_delta(blaschke_lift(prm), opt.delta_orbit, rho);
    const double err = est.refined - delta;
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best = prm;
    }
    return err;
  };
  int iterations = 0;
  illinois(g, std::clamp(delta - 0.1, 0.02, 0.98), std::clamp(delta + 0.1, 0.02, 0.98), opt.delta_tol,
           opt.outer_iterations, &iterations, "outer");
  if (best_err > 1e-3) throw StagedSolveError("outer", "delta error " + std::to_string(best_err));
  return best;
}

BlaschkeParams blaschke_solve_signature(double rho, double delta, const BlaschkeSolveOptions& opt) {
  return blaschke_solve_signature(real_to_cf(rho, 40), delta, opt);
}

FamilyKind parse_family(const std::string& s) {
  if (s == "trig") return FamilyKind::trig;
  if (s == "blaschke") return FamilyKind::blaschke;
  throw ConfigError("unknown family '" + s + "' (expected trig or blaschke)");
}

TunedLift tune_to_signature(FamilyKind family, const Signature& target, const TuneOptions& opt) {
  if (!(target.delta > 0 && target.delta < 1)) throw DomainError("tune_to_signature: delta must lie in (0,1)");
  TunedLift out;
  if (family == FamilyKind::trig) {
    out.result = tune_trig(target, opt);
    out.lift = trig_lift(out.result.params);
    return out;
  }
  BlaschkeSolveOptions bo;
  bo.delta_orbit = std::min<long>(opt.delta_orbit, 400000);
  bo.outer_iterations = opt.max_outer;
  out.result.blaschke = blaschke_solve_signature(target.rho, target.delta, bo);
  out.lift = blaschke_lift(out.result.blaschke);
  const auto cr = closest_returns(out.lift, 60, opt.q_cap);
  out.result.q_matched = cr.back().q;
  const auto est = signature_delta(out.lift, opt.delta_orbit, target.rho_value());
  out.result.delta_measured = est.refined;
  out.result.delta_error = std::max(est.hi - est.lo, std::abs(est.birkhoff - est.refined));
  return out;
}

}  // namespace bicubic
