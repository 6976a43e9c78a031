#ifndef CFPOISON_ATTACKS_HPP_
#define CFPOISON_ATTACKS_HPP_

#include <cstdint>

#include <Eigen/Core>

#include "cfpoison/als.hpp"
#include "cfpoison/implicit_grad.hpp"
#include "cfpoison/nuclear.hpp"
#include "cfpoison/objectives.hpp"
#include "cfpoison/ratings.hpp"

namespace cfpoison {

struct StepSchedule {
  enum class Kind { Constant, InvSqrt };
  Kind kind = Kind::InvSqrt;
  double s0 = 1.0;

  /// Step for 1-based iteration t: s0 or s0/sqrt(t).
  double at(int t) const;
};

/// Which completion model the attack differentiates through, plus its
/// hyperparameters.
struct SolverConfig {
  enum class Kind { Als, Nuclear };
  Kind kind = Kind::Als;

  // alternating minimization
  int rank = 5;
  double lambda_u = 0.1;
  double lambda_v = 0.1;
  double tol = 1e-8;
  int max_sweeps = 500;
  std::uint64_t seed = 0;

  // nuclear norm
  double lambda = 0.5;
  double svt_step = 0.5;
  int svt_max_iter = 50000;

  // implicit gradient settings
  GradSmoothing smoothing;
  bool sigma_path = false;
  double grad_warn = 1e-2;
};

/// One solver instance reused across attack iterations; successive fits warm
/// start from the previous solution.
class SolverSession {
 public:
  SolverSession(const SolverConfig& cfg, const SparseRatings& ratings);

  /// Fit on (ratings; mt) and return normal-user predictions.
  const Eigen::MatrixXd& fit(const MaliciousMatrix& mt);
  const Eigen::MatrixXd& prediction() const { return prediction_; }

  /// Gradient of the utility w.r.t. the fake ratings at the last fit,
  /// aligned with mt.entries().
  std::vector<double> utility_grad(const MaliciousMatrix& mt, const UtilityConfig& util) const;

 private:
  SolverConfig cfg_;
  const SparseRatings* ratings_;
  FactorModel als_model_;
  NuclearModel nuclear_model_;
  Eigen::MatrixXd nuclear_iterate_;  // stacked warm start for SVT
  bool fitted_ = false;
  Eigen::MatrixXd prediction_;
};

/// Convenience: fit once and return predictions.
Eigen::MatrixXd fit_predict(const SolverConfig& cfg, const SparseRatings& ratings,
                            const MaliciousMatrix& mt);

struct PgaConfig {
  int max_iter = 50;
  StepSchedule step{StepSchedule::Kind::InvSqrt, 1.0};
  double conv_tol = 1e-4;  // on the Frobenius change of the fake block
  std::uint64_t seed = 0;
};

/// Projected gradient ascent on the attacker utility. The support is fixed
/// at a random initialization of exactly B items per fake user; projection
/// truncates ratings at the magnitude cap. Returns the feasible iterate with
/// the highest utility seen.
MaliciousMatrix pga_attack(const SparseRatings& ratings, const AttackBudget& budget,
                           const SolverConfig& solver, const UtilityConfig& util,
                           const PgaConfig& cfg);

/// Per-item Gaussian model of normal rating behavior.
struct ItemPrior {
  Eigen::VectorXd xi;      // per-item mean
  Eigen::VectorXd sigma2;  // per-item variance, floored away from zero

  /// The rows x n matrix whose every row is xi.
  Eigen::MatrixXd broadcast(int rows) const;
};

/// Mean and variance per item over all m users, counting unobserved cells
/// as zero ratings (the division is by m). With divide_by_observed the
/// statistics run over raters only; empty columns fall back to (0, floor).
ItemPrior estimate_prior(const SparseRatings& ratings, bool divide_by_observed = false);

struct SgldConfig {
  double beta = 0.6;  // utility weight against the prior
  int iterations = 50;
  StepSchedule step{StepSchedule::Kind::InvSqrt, 0.1};
  std::uint64_t seed = 0;
  bool noise = true;  // Langevin noise; off gives plain preconditioned ascent
  bool prior_divide_by_observed = false;
};

/// Stochastic gradient Langevin dynamics on the posterior that trades the
/// attack utility against closeness to the normal-behavior prior. Operates
/// on a dense fake block initialized from the prior; the final sample is
/// projected by keeping the B largest-magnitude ratings per user and
/// truncating at the cap. `raw_out`, when given, receives the pre-projection
/// dense block.
MaliciousMatrix sgld_attack(const SparseRatings& ratings, const AttackBudget& budget,
                            const SolverConfig& solver, const UtilityConfig& util,
                            const SgldConfig& cfg, Eigen::MatrixXd* raw_out = nullptr);

}  // namespace cfpoison

#endif  // CFPOISON_ATTACKS_HPP_
