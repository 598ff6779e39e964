#pragma once

// Maps written as D_k ∘ q ∘ ... ∘ q ∘ D_0 with q(x) = x^3 and increasing
// Chebyshev pieces D_i. A chain always starts and ends with a piece and has
// exactly one piece between consecutive cube nodes.

#include <limits>
#include <string>
#include <vector>

#include "bicubic/analytic_core.hpp"

namespace bicubic {

struct NodeMeta {
  std::string origin;  // which critical point of the source map produced the node
  int iterate = 0;     // orbit step of the passage
  double critical_point = std::numeric_limits<double>::quiet_NaN();
  bool removable = false;
  bool near_degenerate = false;
};

struct ChainTolerances {
  double compat = 1e-9;          // stage compatibility, relative to the receiving domain length
  double eval_overhang = 1e-3;   // strict evaluation, in half-lengths
  double lenient_overhang = 5e-2;
  double removable_gap = 1e-9;   // sign-definite incoming intervals nearer than this stay as nodes
  double tighten = 1e-13;        // domain mismatch below which a piece is left alone
  double threaded_zero = 1e-12;  // |D(0)| below this (relative) threads a zero through two nodes
};

inline const ChainTolerances& default_chain_tolerances() {
  static const ChainTolerances t{};
  return t;
}

class MapChain {
public:
  MapChain() = default;
  MapChain(std::vector<ChebPiece> pieces, std::vector<NodeMeta> nodes);
  static MapChain single(ChebPiece piece) { return MapChain({std::move(piece)}, {}); }

  const Interval& domain() const { return pieces_.front().domain(); }
  const std::vector<ChebPiece>& pieces() const { return pieces_; }
  const std::vector<ChebPiece>& derivatives() const { return derivs_; }
  const std::vector<NodeMeta>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int max_degree() const;

  /// Image of piece i over its own domain (the incoming interval of node i).
  Interval piece_image(int i) const;
  /// Image of the whole chain over its domain.
  Interval image() const;

private:
  std::vector<ChebPiece> pieces_;
  std::vector<ChebPiece> derivs_;
  std::vector<NodeMeta> nodes_;
};

double chain_eval(const MapChain& c, double x);
/// Evaluation that tolerates stage mismatches up to `overhang` half-lengths;
/// used for probes of perturbed or slightly extrapolated chains.
double chain_eval_lenient(const MapChain& c, double x,
                          double overhang = default_chain_tolerances().lenient_overhang);
/// Value entering node `node` (the output of piece `node`).
double chain_eval_prefix(const MapChain& c, int node, double x, double overhang);
double chain_derivative_at(const MapChain& c, double x);

/// Point of the domain where the prefix entering `node` equals y (or the full
/// chain when node == node_count()). Requires y within the prefix image.
double chain_solve(const MapChain& c, int node, double y);

/// c2 ∘ c1, merging the last piece of c1 into the first piece of c2.
MapChain chain_compose(const MapChain& c2, const MapChain& c1, int degree,
                       double compat = default_chain_tolerances().compat);
MapChain chain_restrict(const MapChain& c, const Interval& j,
                        double compat = default_chain_tolerances().compat);
MapChain chain_canonicalize(const MapChain& c, int degree,
                            const ChainTolerances& tol = default_chain_tolerances());

/// Affine conjugate x ↦ c(λx)/λ, keeping every piece increasing (λ may be negative).
MapChain chain_conjugate_scale(const MapChain& c, double lambda);
/// x ↦ c(x) + d.
MapChain chain_shift_output(const MapChain& c, double d);

struct CriticalPoint {
  double location;
  int order;
};
std::vector<CriticalPoint> chain_critical_points(const MapChain& c,
                                                 const ChainTolerances& tol = default_chain_tolerances());

struct Triple {
  ChebPiece phi1, phi2, phi3;
  double shift = 0;  // the chain's critical point; phi1(x) = D_0(x + shift)
};
Triple chain_to_triple(const MapChain& c);
MapChain chain_from_triple(const Triple& t);

Eigen::VectorXd chain_coordinates(const MapChain& c, const std::vector<int>& degrees);
MapChain chain_from_coordinates(const MapChain& tmpl, const Eigen::VectorXd& v);
int chain_dimension(const std::vector<int>& degrees);

/// Largest stage incompatibility relative to the receiving domain length.
double chain_compat_defect(const MapChain& c);
/// Minimum sampled derivative over `samples` uniform points of the domain.
double chain_min_derivative(const MapChain& c, int samples = 257);

}  // namespace bicubic
