#pragma once

// Continued fractions x = 1/(a_0 + 1/(a_1 + ...)) of numbers in (0, 1),
// convergents, the Gauss map and the action of renormalization on
// signatures (rho, delta).

#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bicubic/errors.hpp"

namespace bicubic {

struct ContinuedFraction {
  std::vector<int> preperiod;
  std::vector<int> period;  // empty: finite expansion
  bool depth_truncated = false;

  static ContinuedFraction finite(std::vector<int> digits);
  static ContinuedFraction periodic(std::vector<int> period, std::vector<int> preperiod = {});

  bool infinite() const { return !period.empty(); }
  /// Number of digits known; INT_MAX for eventually periodic expansions.
  int available() const;
  int digit(int k) const;
  std::vector<int> digits(int n) const;
  bool operator==(const ContinuedFraction&) const = default;
};

std::string to_string(const ContinuedFraction& cf);

/// First `depth` digits of x by x ↦ {1/x}. Stops early when 1/x is within
/// `near_rational` of an integer; that digit is kept and the result is
/// marked depth_truncated.
template <class Scalar>
ContinuedFraction real_to_cf(Scalar x, int depth) {
  using std::floor;
  using std::abs;
  using std::round;
  if (!(x > 0 && x < 1)) throw DomainError("real_to_cf: x must lie in (0,1)");
  const double eps = static_cast<double>(std::numeric_limits<Scalar>::epsilon());
  const Scalar near_rational = Scalar(1e-12 * std::pow(eps / DBL_EPSILON, 0.75));
  ContinuedFraction cf;
  for (int k = 0; k < depth; ++k) {
    const Scalar y = 1 / x;
    const Scalar r = round(y);
    if (abs(y - r) < near_rational) {
      cf.preperiod.push_back(static_cast<int>(r));
      cf.depth_truncated = k + 1 < depth;
      break;
    }
    const Scalar a = floor(y);
    if (a > Scalar(std::numeric_limits<int>::max())) throw DomainError("real_to_cf: digit overflow");
    cf.preperiod.push_back(static_cast<int>(a));
    x = y - a;
  }
  return cf;
}

/// Value of the depth-th convergent by backward evaluation (no overflow).
template <class Scalar>
Scalar cf_value(const ContinuedFraction& cf, int depth) {
  depth = std::min(depth, cf.available());
  Scalar x = 0;
  for (int k = depth - 1; k >= 0; --k) x = Scalar(1) / (Scalar(cf.digit(k)) + x);
  return x;
}

/// Value to working precision: all digits of a finite expansion, or enough
/// periods of an infinite one.
template <class Scalar>
Scalar cf_limit(const ContinuedFraction& cf) {
  if (!cf.infinite()) return cf_value<Scalar>(cf, cf.available());
  // Convergents gain at least a factor golden^2 per digit.
  const double eps = static_cast<double>(std::numeric_limits<Scalar>::epsilon());
  const int depth = static_cast<int>(std::ceil(-std::log(eps) / std::log(2.618))) + 8 +
                    static_cast<int>(cf.preperiod.size());
  return cf_value<Scalar>(cf, depth);
}

double cf_to_real(const ContinuedFraction& cf, int depth);

struct Convergent {
  std::int64_t p;
  std::int64_t q;
};

/// p_k / q_k with p_0/q_0 = 0/1, p_1/q_1 = 1/a_0 and the three-term recursion.
Convergent convergents(const ContinuedFraction& cf, int k);
std::vector<Convergent> convergent_list(const ContinuedFraction& cf, int kmax);

ContinuedFraction gauss_shift(const ContinuedFraction& cf);
bool is_bounded_type(const ContinuedFraction& cf, int bound);

/// How the distance term of the signature cocycle is read:
/// nearest: distance of delta/rho to Z; fractional: {delta/rho};
/// dynamical: the transport of the circle-map critical value to the glued
/// pair, 1 - {delta/rho} when delta < a_0 rho and (1 - delta)/rho otherwise.
enum class CocycleConvention { nearest, fractional, dynamical };

std::string to_string(CocycleConvention c);
CocycleConvention parse_convention(const std::string& s);

template <class Scalar>
struct BasicSignature {
  ContinuedFraction rho;
  Scalar delta{};
  Scalar rho_value() const { return cf_limit<Scalar>(rho); }
};
using Signature = BasicSignature<double>;

template <class Scalar>
BasicSignature<Scalar> cocycle_step(const BasicSignature<Scalar>& s, CocycleConvention conv) {
  using std::floor;
  if (!(s.delta >= 0 && s.delta <= 1)) throw DomainError("cocycle_step: delta outside [0,1]");
  const Scalar rho = s.rho_value();
  const Scalar r = s.delta / rho;
  const Scalar frac = r - floor(r);
  Scalar next{};
  switch (conv) {
    case CocycleConvention::nearest:
      next = frac < Scalar(1) - frac ? frac : Scalar(1) - frac;
      break;
    case CocycleConvention::fractional:
      next = frac;
      break;
    case CocycleConvention::dynamical:
      next = s.delta < Scalar(s.rho.digit(0)) * rho ? Scalar(1) - frac : (Scalar(1) - s.delta) / rho;
      break;
  }
  return BasicSignature<Scalar>{gauss_shift(s.rho), next};
}

struct PeriodicSearch {
  std::vector<std::vector<Signature>> orbits;
  std::vector<std::vector<int>> omitted;  // digit words without a verified orbit
};

/// Orbits of exact period `period` of the cocycle over words in [1..B]^period
/// (one word per rotation class).
PeriodicSearch find_periodic_signatures(int period, int bound, CocycleConvention conv);

/// Period of a signature under the cocycle (0 when larger than `max_period`).
int signature_period(const Signature& s, CocycleConvention conv, int max_period, double tol = 1e-9);

struct CocycleOrbit {
  std::vector<Signature> orbit;  // steps + 1 signatures, starting with the (snapped) input
  bool snapped = false;
  double input_delta = 0;
  double snap_shift = 0;  // snapped delta minus input delta
  double drift = 0;       // max |delta_k - delta_{k-p}| with p the rho period (0 for non-periodic rho)
};
/// `steps` cocycle steps. With `snap`, a purely periodic rho has its delta
/// moved to the periodic point of the cocycle within `snap_tol`, and the orbit
/// is computed with 50 significant digits so that the expansion does not
/// amplify the rounding of the input.
CocycleOrbit cocycle_orbit(const Signature& s, CocycleConvention conv, int steps, bool snap, double snap_tol = 1e-9);

}  // namespace bicubic
