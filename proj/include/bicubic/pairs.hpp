#pragma once

// Commuting pairs (η, ξ) stored as chains, with η on I_η = [0, ξ(0)] and ξ
// on I_ξ = [η(0), 0] (either orientation). Extraction from circle maps,
// renormalization and the glued circle map.

#include <string>
#include <vector>

#include "bicubic/chains.hpp"
#include "bicubic/families.hpp"
#include "bicubic/rotation.hpp"

namespace bicubic {

struct PairOptions {
  int degree = 64;
  double compat = 1e-9;  // stage compatibility for compositions
  int height_cap = 1000000;
  ChainTolerances chain = default_chain_tolerances();
};

struct Provenance {
  std::string family;
  std::vector<double> params;
  int level = -1;
  int renormalizations = 0;
};

struct CommutingPair {
  MapChain eta;
  MapChain xi;
  Provenance provenance;

  double eta0() const;  // η(0)
  double xi0() const;   // ξ(0)
  /// +1 when ξ(0) > 0 (the normalized orientation), -1 otherwise.
  int orientation() const { return xi0() > 0 ? 1 : -1; }
};

/// ξ = F^{q_n} - p_n on I_{n+1} and η = F^{q_{n+1}} - p_{n+1} on I_n, with
/// I_k = [0, F^{q_k}(0) - p_k]. Throws CollisionError when both critical
/// points fall in one step of the orbit walk.
CommutingPair extract_pair(const CircleLift& f, int n, int degree = 64);

/// The local factor s with F(x) = F(x0) + s(x)^3 near a critical point x0.
/// `which` selects the critical point (0 or c).
double critical_factor(const CircleLift& f, int which, double u);

struct PairReport {
  bool ok = false;
  bool straddles_zero = false;  // η(0) and ξ(0) on opposite sides of 0
  bool critical_at_zero = false;
  bool commutes = false;
  bool glues = false;  // ξ(η(0)) ∈ I_η
  double commutation_residual = 0;
  double gluing_residual = 0;  // |ξ(η(0)) - η(ξ(0))|
  std::vector<std::string> messages;
};
PairReport pair_validate(const CommutingPair& p, double tol = 1e-9);

struct Height {
  int value = 0;
  bool infinite = false;
};
Height height(const CommutingPair& p, int cap = 1000000);

/// (η', ξ') = (η^a ∘ ξ on I_ξ, η on [0, η^a(ξ(0))]); a = height unless given.
CommutingPair prerenormalize(const CommutingPair& p, const PairOptions& opt = PairOptions{}, int a = 0);
/// Conjugation by x ↦ x / ξ(0), so that ξ̃(0) = 1 and I_η = [0, 1].
CommutingPair normalize(const CommutingPair& p, const PairOptions& opt = PairOptions{});
/// normalize ∘ prerenormalize. With `frozen_height` > 0 the height is
/// checked against it and a HeightFlipError is thrown on mismatch.
CommutingPair renormalize(const CommutingPair& p, const PairOptions& opt = PairOptions{}, int frozen_height = 0);

class HeightFlipError : public StructuralError {
public:
  HeightFlipError(int expected, int found)
      : StructuralError("height changed from " + std::to_string(expected) + " to " + std::to_string(found)),
        expected(expected), found(found) {}
  int expected, found;
};

/// The circle map obtained by gluing η(0) to ξ(η(0)): η on [0, ξη(0)] and
/// η∘ξ on [η(0), 0] (mirrored when ξ(0) < 0).
class GluedMap {
public:
  explicit GluedMap(const CommutingPair& p);
  double operator()(double x) const;
  double left() const { return left_; }    // η(0), in mirrored coordinates
  double right() const { return right_; }  // ξ(η(0))
  double length() const { return right_ - left_; }
  /// Second critical point of the glued map (NaN when it cannot be placed).
  double critical() const { return crit_; }
  bool degenerate() const { return degenerate_; }
  int sign() const { return s_; }

private:
  const CommutingPair* p_;
  int s_;
  double left_, right_, crit_;
  bool degenerate_ = false;
};

std::vector<double> glued_orbit(const CommutingPair& p, double x0, long n);

struct PairSignature {
  Signature signature;
  double rho_wraps = 0;  // wrap-count estimate of the rotation number
  double delta_error = 0;
  bool order9 = false;
};
/// rho from heights (`depth` digits) and delta by Birkhoff counting along the
/// glued orbit of 0 over the leftward arc from 0 to the second critical point.
PairSignature pair_signature(const CommutingPair& p, long n, int depth = 8,
                             const PairOptions& opt = PairOptions{});

/// sup|η1-η2| + sup|ξ1-ξ2| + |η1(0)-η2(0)| over 129 probes of the common domains.
double pair_distance(const CommutingPair& a, const CommutingPair& b);

RotationResult rotation_number_heights(const CircleLift& f, int depth, int degree);

}  // namespace bicubic
