#ifndef CFPOISON_OBJECTIVES_HPP_
#define CFPOISON_OBJECTIVES_HPP_

#include <vector>

#include <Eigen/Core>

#include "cfpoison/als.hpp"
#include "cfpoison/nuclear.hpp"

namespace cfpoison {

using ObservedMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Attacker utility configuration. The hybrid utility is
///   mu1 * |R_unseen(Mhat - baseline)|_F^2
///   + mu2 * sum_i sum_{j in targets} weight(j) * Mhat_ij,
/// where "unseen" means cells with observed(i,j) == false. Pure availability
/// and integrity objectives are the (1,0) and (0,1) weightings.
struct UtilityConfig {
  double mu1 = 1.0;
  double mu2 = 0.0;
  std::vector<int> target_items;       // J0
  std::vector<double> target_weights;  // aligned with target_items
  Eigen::MatrixXd baseline;            // clean-model predictions, m x n
  ObservedMask observed;               // training support, m x n
};

double utility_value(const Eigen::MatrixXd& Mhat, const UtilityConfig& cfg);

/// Entrywise gradient of utility_value with respect to the predictions.
/// The availability part vanishes on observed cells.
Eigen::MatrixXd utility_grad_mhat(const Eigen::MatrixXd& Mhat, const UtilityConfig& cfg);

/// Gradient of the utility with respect to the ALS factors, for
/// G = utility_grad_mhat(..): dU = G V, dV = G^T U, dU~ = 0 (predictions
/// cover normal users only).
struct ThetaGradAls {
  Eigen::MatrixXd dU;
  Eigen::MatrixXd dU_tilde;
  Eigen::MatrixXd dV;
};
ThetaGradAls grad_r_theta_als(const FactorModel& model, const Eigen::MatrixXd& G);

/// Gradient with respect to the reduced nuclear parameterization
/// (U, U~, V, sigma): dU = G V Sigma, dV = G^T U Sigma,
/// dsigma_t = u_t^T G v_t, dU~ = 0.
struct ThetaGradNuclear {
  Eigen::MatrixXd dU;
  Eigen::MatrixXd dU_tilde;
  Eigen::MatrixXd dV;
  Eigen::VectorXd dsigma;
};
ThetaGradNuclear grad_r_theta_nuclear(const NuclearModel& model, const Eigen::MatrixXd& G);

}  // namespace cfpoison

#endif  // CFPOISON_OBJECTIVES_HPP_
