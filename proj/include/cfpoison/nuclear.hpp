#ifndef CFPOISON_NUCLEAR_HPP_
#define CFPOISON_NUCLEAR_HPP_

#include <vector>

#include <Eigen/Core>

#include "cfpoison/ratings.hpp"

namespace cfpoison {

/// Nuclear-norm completion of the stacked matrix [M; Mt], plus the reduced
/// SVD of the solution: [X; X_tilde] = [U; U_tilde] diag(sigma) V^T with
/// orthonormal stacked-U and V columns and sigma sorted descending.
struct NuclearModel {
  Eigen::MatrixXd X;        // m x n, normal block
  Eigen::MatrixXd X_tilde;  // m' x n, malicious block
  double lambda = 0.0;
  Eigen::MatrixXd U;        // m x rho
  Eigen::MatrixXd U_tilde;  // m' x rho
  Eigen::MatrixXd V;        // n x rho
  Eigen::VectorXd sigma;    // rho, descending

  int rank() const { return static_cast<int>(sigma.size()); }
};

struct SvtOptions {
  double step = 0.5;     // gradient step; per-entry Lipschitz constant is 2
  double tol = 1e-10;    // relative objective decrease
  int max_iter = 50000;
  const Eigen::MatrixXd* init = nullptr;  // (m+m') x n start, default zero
};

struct SvtFitInfo {
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
};

/// Proximal operator of threshold * nuclear norm: soft-threshold the
/// singular values of A.
Eigen::MatrixXd shrink_singular_values(const Eigen::MatrixXd& A, double threshold);

/// Proximal gradient (singular value thresholding) on
///   |R_Omega(M - X)|_F^2 + |R_OmegaTilde(Mt - X~)|_F^2 + 2 lambda |(X; X~)|_*.
/// Throws on failure to reach tol within max_iter.
NuclearModel svt_fit(const SparseRatings& ratings, const MaliciousMatrix& malicious,
                     double lambda, const SvtOptions& opts = {}, SvtFitInfo* info = nullptr);

/// Objective of the stacked iterate Z = [X; X~].
double svt_objective(const Eigen::MatrixXd& Z, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious, double lambda);

/// Predictions for normal users: the X block.
Eigen::MatrixXd predict_nuclear(const NuclearModel& model);

/// Per-entry dual variables of the nuclear-norm stationarity conditions:
/// w_ij = (M_ij - u_i^T (Sigma + lambda I) v_j) / lambda on the observed
/// support, and the analogous values on the malicious support. Value order
/// matches the entry order of the corresponding sparse matrix.
struct DualVariables {
  std::vector<double> normal;     // aligned with ratings.entries()
  std::vector<double> malicious;  // aligned with malicious.entries()
};
DualVariables dual_w(const NuclearModel& model, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious);

}  // namespace cfpoison

#endif  // CFPOISON_NUCLEAR_HPP_
