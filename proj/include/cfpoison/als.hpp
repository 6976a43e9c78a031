#ifndef CFPOISON_ALS_HPP_
#define CFPOISON_ALS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cfpoison/ratings.hpp"

namespace cfpoison {

/// Latent factors of the joint alternating-minimization fit: rows of U are
/// normal-user factors, rows of U_tilde fake-user factors, rows of V item
/// factors.
struct FactorModel {
  Eigen::MatrixXd U;        // m x k
  Eigen::MatrixXd U_tilde;  // m' x k
  Eigen::MatrixXd V;        // n x k
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  int rank = 0;
};

struct AlsOptions {
  double tol = 1e-8;    // relative objective decrease per sweep
  int max_iter = 500;   // sweeps
  std::uint64_t seed = 0;
  const FactorModel* warm_start = nullptr;  // optional; overrides seeded init
};

struct AlsFitInfo {
  std::vector<double> objective_history;  // value after each sweep, [0] = initial
  int sweeps = 0;
  bool converged = false;
};

/// Regularized joint objective:
///   sum_Omega (M - u v)^2 + sum_OmegaTilde (Mt - u~ v)^2
///   + lambda_u (|U|_F^2 + |U~|_F^2) + lambda_v |V|_F^2.
/// This is the form whose row-wise stationarity conditions read
/// lambda_u u_i = sum_j (M_ij - u_i.v_j) v_j.
double als_objective(const FactorModel& model, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious);

/// Exact minimizer of sum_e (targets_e - u . dirs_e)^2 + lambda |u|^2 over u:
/// solves (lambda I + sum_e dirs_e dirs_e^T) u = sum_e targets_e dirs_e by
/// dense Cholesky. Rows with no observations get the zero vector.
Eigen::VectorXd ridge_row_solve(const std::vector<Eigen::VectorXd>& dirs,
                                const std::vector<double>& targets, double lambda);

/// Alternating minimization over (U, U_tilde, V). Each half-sweep applies the
/// closed-form ridge update to every row of one block; sweeps stop when the
/// relative objective decrease falls below tol.
FactorModel als_fit(const SparseRatings& ratings, const MaliciousMatrix& malicious,
                    double lambda_u, double lambda_v, int rank, const AlsOptions& opts = {},
                    AlsFitInfo* info = nullptr);

/// Predictions for normal users: U V^T.
Eigen::MatrixXd predict_als(const FactorModel& model);

/// Maximum row-wise Euclidean norm of the stationarity residuals
/// lambda_u u_i - sum_j (M_ij - u_i.v_j) v_j (and the u~, v analogues).
double kkt_residual(const FactorModel& model, const SparseRatings& ratings,
                    const MaliciousMatrix& malicious);

}  // namespace cfpoison

#endif  // CFPOISON_ALS_HPP_
