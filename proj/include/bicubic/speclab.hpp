#pragma once

// Experiments on the renormalization operator: convergence of same-signature
// maps, C^1 bounds along the tower, fixed points of periodic signatures, and
// the spectrum of the finite-difference Jacobian in chain coordinates.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bicubic/families.hpp"
#include "bicubic/pairs.hpp"

namespace bicubic {

class SetupError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class ColumnError : public NumericalError {
public:
  ColumnError(int column, const std::string& what)
      : NumericalError("jacobian column " + std::to_string(column) + ": " + what), column(column) {}
  int column;
};

struct ChartOptions {
  int degree = 64;
  double compat = 1e-6;      // composition tolerance for perturbed pairs
  bool glue_projection = true;  // re-impose ξ(η(0)) = η(ξ(0)) with a constant shift of ξ
  bool jet_projection = true;   // and equal cubic terms of η∘ξ and ξ∘η at 0
};

/// Coordinates of pairs near a template: Chebyshev coefficients of every
/// piece of η then ξ on the template's piece domains.
class OperatorChart {
public:
  OperatorChart(const CommutingPair& tmpl, int period, const ChartOptions& opt = ChartOptions{});

  int dim() const { return dim_; }
  int period() const { return period_; }
  const CommutingPair& templ() const { return tmpl_; }
  const std::vector<int>& heights() const { return heights_; }
  const ChartOptions& options() const { return opt_; }
  PairOptions pair_options() const;

  Eigen::VectorXd to_coordinates(const CommutingPair& p) const;
  /// Inverse of to_coordinates on the template, followed by the gauge
  /// projections (critical point at 0, gluing) and the true pair domains.
  CommutingPair from_coordinates(const Eigen::VectorXd& v) const;
  /// Φ: `period` renormalizations with the template heights frozen.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  CommutingPair renormalize_frozen(const CommutingPair& p) const;

private:
  CommutingPair project(CommutingPair p) const;

  CommutingPair tmpl_;
  int period_;
  ChartOptions opt_;
  std::vector<int> heights_;
  int dim_ = 0;
};

/// Central differences, column j = (Φ(v + h_j e_j) - Φ(v - h_j e_j)) / 2h_j
/// with h_j = h max(1, |v_j|). A failing column is retried once at h/2.
/// Columns run on `threads` workers (0: hardware concurrency).
Eigen::MatrixXd jacobian_fd(const OperatorChart& chart, const Eigen::VectorXd& point, double h = 1e-6,
                            int threads = 0);

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing modulus
  int unstable_count = 0;
  std::vector<std::complex<double>> neutral_band;
  double margin = 0.05;
  double degree_drift = 0;
  int degree = 0;
};
SpectralReport spectrum(const Eigen::MatrixXd& j, double margin = 0.05);
/// Unit eigenvectors of the two largest eigenvalues (real parts when complex).
std::pair<Eigen::VectorXd, Eigen::VectorXd> leading_eigenvectors(const Eigen::MatrixXd& j);

struct ConvergenceResult {
  std::vector<int> levels;
  std::vector<double> distances;
  double rate = 0;  // fitted λ̂
  double r2 = 0;
  double intercept = 0;
};
/// d_n = pair_distance of the normalized level-n pairs of f1 and f2, with a
/// log-linear least-squares fit over [n_min, n_max].
ConvergenceResult convergence_experiment(const CircleLift& f1, const CircleLift& f2, int n_min, int n_max,
                                         int degree = 64);
/// Least-squares fit of log d against n; returns {rate, r2, intercept}.
ConvergenceResult fit_log_linear(const std::vector<int>& n, const std::vector<double>& d);

struct BoundsRecord {
  int n;
  double ratio;   // |η̃(0)| = |I_ξ| / |I_η| of the normalized pair
  double c1norm;  // sup |η̃'|
};
std::vector<BoundsRecord> real_bounds_monitor(const CircleLift& f, int n_min, int n_max, int degree = 64);

struct BoundsWindow {
  double ratio_lo, ratio_hi, c1_lo, c1_hi;
};
BoundsWindow bounds_window(const std::vector<BoundsRecord>& rec, int n_min, int n_max);

struct RefineOptions {
  int degree = 64;
  int level = 3;          // extraction level of the seed
  int iterations = 10;    // plain renormalizations before polishing
  int period = 1;
  bool newton = true;
  int newton_steps = 8;
  double newton_tol = 1e-11;  // coordinate residual
  double step_clip = 0.1;
  double h = 1e-6;
  int threads = 0;
};

struct RefineReport {
  CommutingPair pair;
  std::vector<double> distances;         // d(ζ_n, ζ_{n+period}) along the plain iteration
  std::vector<double> newton_residuals;  // sup-norm of Φ(v) - v per Newton step
  double residual = 0;                   // pair_distance(Φ(ζ), ζ) at the end
  Eigen::MatrixXd jacobian;              // at the last Newton iterate (empty without Newton)
  bool converged = false;
};
RefineReport fixed_point_refine(const CircleLift& seed, const RefineOptions& opt = RefineOptions{});

struct CollisionRecord {
  Signature signature;
  int unstable_count = -1;
  double angle = 0;  // between the two leading eigenvectors, radians in [0, π/2]
  double residual = 0;
  std::string error;  // empty on success
};
/// For each periodic signature: tune a trig map, refine the periodic point,
/// and measure the leading eigen-directions.
std::vector<CollisionRecord> collision_probe(const std::vector<std::vector<Signature>>& orbits,
                                             const RefineOptions& opt = RefineOptions{},
                                             const TuneOptions& tune = TuneOptions{});

}  // namespace bicubic
