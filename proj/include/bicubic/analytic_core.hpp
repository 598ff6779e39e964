#pragma once

// Chebyshev-series representation of analytic real functions on intervals.
// Everything here is templated on the scalar type so that an extended
// precision build (long double) only has to tighten CoreTolerances.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include "bicubic/errors.hpp"

namespace bicubic {

template <class Scalar>
struct BasicInterval {
  Scalar lo{-1};
  Scalar hi{1};

  BasicInterval() = default;
  BasicInterval(Scalar a, Scalar b) : lo(a), hi(b) {
    if (!(std::isfinite(static_cast<double>(a)) && std::isfinite(static_cast<double>(b))) || !(a < b))
      throw DomainError("invalid interval [" + std::to_string(static_cast<double>(a)) + ", " +
                        std::to_string(static_cast<double>(b)) + "]");
  }
  /// Interval with endpoints a and b in either order.
  static BasicInterval spanning(Scalar a, Scalar b) { return a < b ? BasicInterval(a, b) : BasicInterval(b, a); }

  Scalar length() const { return hi - lo; }
  Scalar mid() const { return (lo + hi) / 2; }
  Scalar to_unit(Scalar x) const { return (2 * x - lo - hi) / (hi - lo); }
  Scalar from_unit(Scalar t) const { return mid() + t * length() / 2; }
  bool contains(Scalar x, Scalar rel_tol = 0) const {
    const Scalar pad = rel_tol * length();
    return x >= lo - pad && x <= hi + pad;
  }
  bool contains(const BasicInterval& other, Scalar rel_tol = 0) const {
    return contains(other.lo, rel_tol) && contains(other.hi, rel_tol);
  }
  /// Distance of x outside the interval (0 inside).
  Scalar excess(Scalar x) const { return std::max<Scalar>({lo - x, x - hi, Scalar(0)}); }
  bool operator==(const BasicInterval&) const = default;
};

enum class Monotone { none, increasing };

/// Numerical tolerances of the analytic core. All are relative quantities;
/// `scaled` tightens or loosens them uniformly.
struct CoreTolerances {
  double overhang = 1e-3;          // real evaluation beyond the domain, fraction of the half-length
  double bernstein_rho = 2.0;      // complex evaluation ellipse parameter
  double converged_tail = 1e-12;   // tail estimate below which a piece counts as converged
  double singular_derivative = 1e-12;  // inverse refuses min p' below this * (range/length)
  double inverse_tol = 1e-15;      // Newton stopping tolerance, relative to the image length

  CoreTolerances scaled(double s) const {
    CoreTolerances t = *this;
    t.converged_tail *= s;
    t.singular_derivative *= s;
    t.inverse_tol *= s;
    return t;
  }
};

inline const CoreTolerances& default_core_tolerances() {
  static const CoreTolerances t{};
  return t;
}

template <class Scalar>
class BasicChebPiece {
public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Interval = BasicInterval<Scalar>;

  BasicChebPiece() : coeffs_(Vector::Zero(2)) {}
  BasicChebPiece(Interval domain, Vector coeffs, Monotone flag = Monotone::none)
      : domain_(domain), coeffs_(std::move(coeffs)), flag_(flag) {
    if (coeffs_.size() < 2) {
      Vector padded = Vector::Zero(2);
      if (coeffs_.size() == 1) padded(0) = coeffs_(0);
      coeffs_ = padded;
    }
  }

  const Interval& domain() const { return domain_; }
  const Vector& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  Monotone monotone() const { return flag_; }
  bool increasing() const { return flag_ == Monotone::increasing; }

  /// max |c_{N-1}|, |c_N|: a cheap truncation-error proxy.
  Scalar tail() const {
    const int n = degree();
    return std::max(std::abs(coeffs_(n)), std::abs(coeffs_(n - 1)));
  }
  bool converged(const CoreTolerances& tol = default_core_tolerances()) const {
    const Scalar scale = std::max<Scalar>(coeffs_.cwiseAbs().maxCoeff(), Scalar(1));
    return tail() < tol.converged_tail * scale;
  }

  /// Clenshaw evaluation at a real point; points more than `overhang`
  /// half-lengths outside the domain are rejected.
  Scalar operator()(Scalar x) const { return eval(x, default_core_tolerances().overhang); }

  Scalar eval(Scalar x, double overhang) const {
    const Scalar t = domain_.to_unit(x);
    if (!(std::abs(t) <= 1 + overhang)) {
      throw OutOfDomainError("real evaluation outside domain",
                             static_cast<double>(domain_.excess(x)));
    }
    return clenshaw(t);
  }

  Scalar eval_unchecked(Scalar x) const { return clenshaw(domain_.to_unit(x)); }

  std::complex<Scalar> operator()(std::complex<Scalar> z) const {
    return eval(z, default_core_tolerances().bernstein_rho);
  }

  std::complex<Scalar> eval(std::complex<Scalar> z, double bernstein_rho) const {
    const Scalar half = domain_.length() / 2;
    const std::complex<Scalar> t = (z - domain_.mid()) / half;
    const std::complex<Scalar> root = std::sqrt(t - Scalar(1)) * std::sqrt(t + Scalar(1));
    const Scalar rho = std::max(std::abs(t + root), std::abs(t - root));
    if (rho > bernstein_rho) {
      throw OutOfDomainError("complex evaluation outside Bernstein ellipse",
                             static_cast<double>(rho - bernstein_rho));
    }
    return clenshaw(t);
  }

  void set_monotone(Monotone flag) { flag_ = flag; }

private:
  template <class V>
  V clenshaw(V t) const {
    V b1{0}, b2{0};
    const V two_t = Scalar(2) * t;
    for (int k = degree(); k >= 1; --k) {
      const V b0 = two_t * b1 - b2 + coeffs_(k);
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + coeffs_(0);
  }

  Interval domain_{};
  Vector coeffs_;
  Monotone flag_ = Monotone::none;
};

using Interval = BasicInterval<double>;
using ChebPiece = BasicChebPiece<double>;

namespace detail {

/// First-kind Chebyshev nodes on [-1, 1] in descending order.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cheb_nodes(int degree) {
  const int m = degree + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> t(m);
  for (int k = 0; k < m; ++k)
    t(k) = std::cos(std::numbers::pi_v<Scalar> * Scalar(2 * k + 1) / Scalar(2 * m));
  return t;
}

/// Discrete cosine matrix mapping node values to coefficients. The cosine
/// argument is reduced exactly in integers before scaling by pi.
template <class Scalar>
const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cheb_transform(int degree) {
  thread_local std::map<int, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  const int m = degree + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a(m, m);
  const long period = 4L * m;
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      const long arg = (static_cast<long>(j) * (2 * k + 1)) % period;
      a(j, k) = Scalar(2) / Scalar(m) *
                std::cos(std::numbers::pi_v<Scalar> * Scalar(arg) / Scalar(2 * m));
    }
  }
  a.row(0) /= Scalar(2);
  return cache.emplace(degree, std::move(a)).first->second;
}

}  // namespace detail

/// Chebyshev points of `domain` used by cheb_fit, ordered as in the fit.
template <class Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cheb_points(const BasicInterval<Scalar>& domain, int degree) {
  auto t = detail::cheb_nodes<Scalar>(degree);
  for (int k = 0; k < t.size(); ++k) t(k) = domain.from_unit(t(k));
  return t;
}

/// Interpolate f at the degree+1 first-kind Chebyshev points of `domain`.
/// With Monotone::increasing the derivative is checked positive at the
/// sample nodes.
template <class Scalar, class F>
BasicChebPiece<Scalar> cheb_fit(F&& f, const BasicInterval<Scalar>& domain, int degree,
                                Monotone flag = Monotone::none) {
  if (degree < 1) throw DomainError("cheb_fit: degree must be >= 1");
  const auto x = cheb_points(domain, degree);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values(x.size());
  for (int k = 0; k < x.size(); ++k) {
    values(k) = static_cast<Scalar>(f(x(k)));
    if (!std::isfinite(static_cast<double>(values(k))))
      throw NonFiniteSampleError(static_cast<double>(x(k)), k);
  }
  BasicChebPiece<Scalar> piece(domain, detail::cheb_transform<Scalar>(degree) * values, Monotone::none);
  if (flag == Monotone::increasing) {
    const auto d = cheb_derivative(piece);
    for (int k = 0; k < x.size(); ++k) {
      if (!(d.eval_unchecked(x(k)) > 0))
        throw MonotonicityError("cheb_fit: derivative not positive at node " + std::to_string(k));
    }
    piece.set_monotone(Monotone::increasing);
  }
  return piece;
}

template <class Scalar>
Scalar cheb_eval(const BasicChebPiece<Scalar>& p, Scalar x) {
  return p(x);
}

template <class Scalar>
std::complex<Scalar> cheb_eval(const BasicChebPiece<Scalar>& p, std::complex<Scalar> z) {
  return p(z);
}

template <class Scalar>
BasicChebPiece<Scalar> cheb_derivative(const BasicChebPiece<Scalar>& p) {
  using Vector = typename BasicChebPiece<Scalar>::Vector;
  const int n = p.degree();
  const Vector& c = p.coeffs();
  Vector d = Vector::Zero(std::max(n, 2));
  if (n >= 1) {
    // d_{k-1} = d_{k+1} + 2 k c_k, run downward.
    Vector e = Vector::Zero(n + 2);
    for (int k = n; k >= 1; --k) e(k - 1) = e(k + 1) + Scalar(2 * k) * c(k);
    e(0) /= Scalar(2);
    const Scalar scale = Scalar(2) / p.domain().length();
    for (int k = 0; k < n; ++k) d(k) = e(k) * scale;
  }
  return BasicChebPiece<Scalar>(p.domain(), d, Monotone::none);
}

/// Re-expand p at a new degree (padding is exact; truncation interpolates).
template <class Scalar>
BasicChebPiece<Scalar> cheb_refit(const BasicChebPiece<Scalar>& p, int degree) {
  if (degree >= p.degree()) {
    typename BasicChebPiece<Scalar>::Vector c = BasicChebPiece<Scalar>::Vector::Zero(degree + 1);
    c.head(p.coeffs().size()) = p.coeffs();
    return BasicChebPiece<Scalar>(p.domain(), c, p.monotone());
  }
  auto fitted = cheb_fit([&](Scalar x) { return p.eval_unchecked(x); }, p.domain(), degree);
  fitted.set_monotone(p.monotone());
  return fitted;
}

/// Same function re-expanded on another interval. Points of J outside the
/// domain of p are reached by polynomial continuation, bounded by `overhang`.
template <class Scalar>
BasicChebPiece<Scalar> cheb_restrict(const BasicChebPiece<Scalar>& p, const BasicInterval<Scalar>& j,
                                     int degree, double overhang = default_core_tolerances().overhang) {
  auto fitted = cheb_fit([&](Scalar x) { return p.eval(x, overhang); }, j, degree);
  fitted.set_monotone(p.monotone());
  return fitted;
}

/// Refit of outer∘inner on the domain of inner. `range_tol` is measured in
/// half-lengths of the outer domain.
template <class Scalar>
BasicChebPiece<Scalar> cheb_compose(const BasicChebPiece<Scalar>& outer, const BasicChebPiece<Scalar>& inner,
                                    int degree, double range_tol = default_core_tolerances().overhang) {
  const auto probes = cheb_points(inner.domain(), 2 * degree + 1);
  Scalar escape = std::max(outer.domain().excess(inner.eval_unchecked(inner.domain().lo)),
                           outer.domain().excess(inner.eval_unchecked(inner.domain().hi)));
  for (int k = 0; k < probes.size(); ++k)
    escape = std::max(escape, outer.domain().excess(inner.eval_unchecked(probes(k))));
  if (escape > range_tol * outer.domain().length() / 2) throw CompositionRangeError(static_cast<double>(escape));
  auto fitted = cheb_fit([&](Scalar x) { return outer.eval_unchecked(inner.eval_unchecked(x)); },
                         inner.domain(), degree);
  if (outer.increasing() && inner.increasing()) fitted.set_monotone(Monotone::increasing);
  return fitted;
}

/// Inverse of an increasing piece on its image, by safeguarded Newton at
/// each Chebyshev node of the image.
template <class Scalar>
BasicChebPiece<Scalar> cheb_invert(const BasicChebPiece<Scalar>& p, int degree,
                                   const CoreTolerances& tol = default_core_tolerances()) {
  if (!p.increasing()) throw MonotonicityError("cheb_invert: piece is not flagged increasing");
  const auto& dom = p.domain();
  const Scalar ylo = p.eval_unchecked(dom.lo);
  const Scalar yhi = p.eval_unchecked(dom.hi);
  const auto dp = cheb_derivative(p);
  const auto probes = cheb_points(dom, 4 * (p.degree() + 1));
  Scalar min_d = std::min(dp.eval_unchecked(dom.lo), dp.eval_unchecked(dom.hi));
  for (int k = 0; k < probes.size(); ++k) min_d = std::min(min_d, dp.eval_unchecked(probes(k)));
  const Scalar slope = (yhi - ylo) / dom.length();
  if (!(yhi > ylo) || !(min_d > tol.singular_derivative * slope))
    throw NearSingularInverseError(static_cast<double>(min_d));

  const BasicInterval<Scalar> image(ylo, yhi);
  const Scalar ytol = tol.inverse_tol * image.length();
  auto solve = [&](Scalar y) {
    Scalar a = dom.lo, b = dom.hi;
    Scalar x = dom.lo + (y - ylo) / slope;
    for (int it = 0; it < 100; ++it) {
      const Scalar r = p.eval_unchecked(x) - y;
      if (r > 0) b = std::min(b, x); else a = std::max(a, x);
      if (std::abs(r) <= ytol) break;
      Scalar next = x - r / dp.eval_unchecked(x);
      if (!(next > a && next < b)) next = (a + b) / 2;
      if (std::abs(next - x) <= 4 * std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(1, std::abs(x))) {
        x = next;
        break;
      }
      x = next;
    }
    return x;
  };
  return cheb_fit(solve, image, degree, Monotone::increasing);
}

/// x ↦ c·p(a·x + b) + d, by exact coefficient transforms. The result lives on
/// the preimage of the domain of p under x ↦ a·x + b.
template <class Scalar>
BasicChebPiece<Scalar> cheb_affine(const BasicChebPiece<Scalar>& p, Scalar a, Scalar b, Scalar c, Scalar d) {
  if (a == 0 || c == 0) throw DomainError("cheb_affine: zero scale");
  auto coeffs = p.coeffs();
  const auto& dom = p.domain();
  const auto domain = BasicInterval<Scalar>::spanning((dom.lo - b) / a, (dom.hi - b) / a);
  if (a < 0) {
    for (int k = 1; k < coeffs.size(); k += 2) coeffs(k) = -coeffs(k);
  }
  coeffs *= c;
  coeffs(0) += d;
  const bool stays_increasing = p.increasing() && ((a > 0) == (c > 0));
  return BasicChebPiece<Scalar>(domain, coeffs, stays_increasing ? Monotone::increasing : Monotone::none);
}

/// Sup-norm of p − q sampled at n uniform points of the common domain.
template <class Scalar>
Scalar cheb_distance(const BasicChebPiece<Scalar>& p, const BasicChebPiece<Scalar>& q, int n = 129) {
  const Scalar lo = std::max(p.domain().lo, q.domain().lo);
  const Scalar hi = std::min(p.domain().hi, q.domain().hi);
  Scalar worst = 0;
  for (int k = 0; k < n; ++k) {
    const Scalar x = lo + (hi - lo) * Scalar(k) / Scalar(n - 1);
    worst = std::max(worst, std::abs(p.eval_unchecked(x) - q.eval_unchecked(x)));
  }
  return worst;
}

}  // namespace bicubic
