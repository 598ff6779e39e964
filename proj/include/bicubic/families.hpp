#pragma once

// Bi-cubic circle maps given by their lifts F with F(x+1) = F(x) + 1,
// critical points at 0 and c, and 0 < F(0) < 1. Orbit tools: closest
// returns, rotation numbers, the signature delta and dynamical partitions.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bicubic/analytic_core.hpp"
#include "bicubic/rotation.hpp"

namespace bicubic {

struct CircleLift {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  /// Analytic continuation of F' (used for Taylor data at critical points).
  std::function<std::complex<double>(std::complex<double>)> deriv_complex;
  /// F'(x0 + u) / u^2 for x0 = crit[which], free of cancellation; optional.
  std::function<double(int which, double u)> deriv_over_square;
  std::array<double, 2> crit{0.0, 0.5};
  std::string family;
  std::vector<double> params;
  std::vector<std::string> warnings;

  double c() const { return crit[1]; }
};

/// F(x) = omega + K ∫_0^x (1 - cos 2πs)(1 - cos 2π(s - c))(1 + shape·sin 2πs) ds,
/// K normalizing the degree to one. shape = 0 is the plain two-parameter
/// family; other values give same-signature maps of different shape.
struct TrigParams {
  double omega = 0.5;
  double c = 0.5;
  double shape = 0.0;
};

CircleLift trig_lift(const TrigParams& params);

/// e^{2πit} z^3 (z-p)/(1-p̄z) (z-q)/(1-q̄z), |p|, |q| > 1.
struct BlaschkeParams {
  double t = 0.0;
  std::complex<double> p{2.0, 0.0};
  std::complex<double> q{2.0, 0.0};
};

/// Raw angular lift θ ↦ arg B(e^{2πiθ}) / 2π, with no normalization.
CircleLift blaschke_raw_lift(const BlaschkeParams& params);
/// Unit-modulus defect max | |B(e^{2πiθ})| - 1 | over `probes` points.
double blaschke_modulus_defect(const BlaschkeParams& params, int probes = 256);

struct BlaschkeValidation {
  bool bicubic = false;
  std::vector<double> critical;         // angles of the double zeros of F'
  std::vector<std::pair<double, double>> bad_arcs;  // arcs where F' < 0
  double min_derivative = 0;
};
BlaschkeValidation blaschke_validate(const BlaschkeParams& params);
/// Lift conjugated so that its critical points are 0 and c; throws when the
/// parameters are not bi-cubic.
CircleLift blaschke_lift(const BlaschkeParams& params);

struct BlaschkeSolveOptions {
  int inner_iterations = 60;
  int middle_q_cap = 200000;
  int outer_iterations = 40;
  long delta_orbit = 200000;
  double delta_tol = 2e-4;
};
BlaschkeParams blaschke_solve_signature(double rho, double delta,
                                        const BlaschkeSolveOptions& opt = BlaschkeSolveOptions{});
BlaschkeParams blaschke_solve_signature(const ContinuedFraction& rho, double delta,
                                        const BlaschkeSolveOptions& opt = BlaschkeSolveOptions{});

/// A point of a lift orbit stored as integer part plus remainder in [0,1).
struct LiftPoint {
  std::int64_t n = 0;
  double r = 0;
  double value() const { return static_cast<double>(n) + r; }
};
LiftPoint lift_step(const CircleLift& f, LiftPoint x);
/// F^k(x) for a real lift coordinate x.
double lift_iterate(const CircleLift& f, double x, long k);

struct ClosestReturn {
  int k;
  std::int64_t q;
  std::int64_t p;
  double d;  // F^q(0) - p
};
/// Closest returns of the orbit of 0 for k = 0..depth (fewer when the orbit
/// cap is reached). Throws when consecutive returns fail to alternate sides.
std::vector<ClosestReturn> closest_returns(const CircleLift& f, int depth, long q_cap = 10000000);
ContinuedFraction digits_from_returns(const std::vector<ClosestReturn>& cr);

enum class RotationMethod { iterate, heights };

struct RotationResult {
  double value = 0;
  double error = 0;
  ContinuedFraction cf;
};
/// iterate: closest returns over `depth` orbit points, value = midpoint of the
/// last two convergents; heights: digits from repeated pair renormalization.
RotationResult rotation_number(const CircleLift& f, RotationMethod method, long depth, int degree = 48);

struct DeltaEstimate {
  double birkhoff = 0;  // orbit fraction in [0, c)
  double error = 0;     // 3 / q_K
  double lo = 0, hi = 1;  // conjugacy values of the orbit points bracketing c
  double refined = 0;   // interpolation inside the bracket
};
/// Signature delta. The bracket uses h(F^j(0)) = {j rho} with `rho` the
/// rotation number (when rho <= 0, the last closest-return convergent p_K/q_K).
DeltaEstimate signature_delta(const CircleLift& f, long n_orbit, double rho = -1);

struct PartitionElement {
  double lo;   // in [0,1)
  double hi;   // lo + length, may exceed 1
  int family;  // n for iterates of I_n, n+1 for iterates of I_{n+1}
  long iterate;
};
std::vector<PartitionElement> dynamical_partition(const CircleLift& f, int n, double tol = 1e-9);
/// Index of the element containing x mod 1 in its interior (-1 if none).
int partition_locate(const std::vector<PartitionElement>& parts, double x);

struct TuneOptions {
  long q_cap = 2000000;      // deepest convergent used by the rotation-number bisection
  long delta_orbit = 1000000;
  double delta_tol = 2e-7;
  int max_outer = 40;
  double shape = 0.0;
  double c_guess = -1;  // trig: start the delta search next to this c when in (0,1)
};

struct TuneResult {
  TrigParams params;
  BlaschkeParams blaschke;
  double delta_measured = 0;
  double delta_error = 0;
  std::int64_t q_matched = 0;
  int outer_iterations = 0;  // secant steps of the delta search
};

/// Omega bisection at fixed c: the first convergent p_k/q_k on the wrong side
/// decides the direction. Returns omega.
double tune_trig_rotation(const ContinuedFraction& rho, double c, double shape, long q_cap,
                          std::int64_t* q_matched = nullptr);
TuneResult tune_trig(const Signature& target, const TuneOptions& opt = TuneOptions{});

enum class FamilyKind { trig, blaschke };
FamilyKind parse_family(const std::string& s);

struct TunedLift {
  CircleLift lift;
  TuneResult result;
};
/// Rotation number by monotone bisection, then delta by a secant search in
/// the second parameter (c for trig, the zero spread for Blaschke).
TunedLift tune_to_signature(FamilyKind family, const Signature& target, const TuneOptions& opt = TuneOptions{});

}  // namespace bicubic
