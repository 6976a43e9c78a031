#ifndef CFPOISON_IMPLICIT_GRAD_HPP_
#define CFPOISON_IMPLICIT_GRAD_HPP_

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "cfpoison/objectives.hpp"

namespace cfpoison {

/// Ridge smoothing for the nuclear-model gradient systems.
struct GradSmoothing {
  double tau = 1e-3;
};

struct AlsGradOptions {
  // stationarity residual above which a stderr warning is emitted; the
  // gradient formulas assume a converged model
  double convergence_warn = 1e-4;
};

/// Gradient of the utility with respect to the fake ratings, by
/// differentiating the row-wise stationarity conditions of the joint fit at
/// the solution. Values align with malicious.entries(). The contribution of
/// entry (i, j) combines the fake-user path
///   (lambda_u I + sum_{j' in support(i)} v_j' v_j'^T)^{-1} v_j . dU~_i
/// and the item path
///   (lambda_v I + sum_{raters of j} u u^T)^{-1} u~_i . dV_j,
/// where the item Gram runs over normal and fake raters.
std::vector<double> als_implicit_grad(const FactorModel& model, const SparseRatings& ratings,
                                      const MaliciousMatrix& malicious, const ThetaGradAls& grad,
                                      const AlsGradOptions& opts = {});

struct NuclearGradOptions {
  GradSmoothing smoothing;
  bool sigma_path = true;
  // |u~_it v_jt| below sigma_eps clamps the reciprocal to sigma_clamp
  double sigma_eps = 1e-6;
  double sigma_clamp = 1e6;
};

/// Nuclear-model analogue via the ridge-regularized per-entry systems: for
/// entry (i, l), with S = Sigma + lambda I,
///   du~_i = (S G_u^i S + tau I)^{-1} S v_l,   G_u^i = sum_{j in support(i)} v_j v_j^T
///   dv_l  = (S G_v^l S + tau I)^{-1} S u~_i,  G_v^l over all raters of l,
/// plus an optional dsigma_t = 1 / (u~_it v_lt) path (clamped near zero
/// factor entries). Values align with malicious.entries().
std::vector<double> nuclear_implicit_grad(const NuclearModel& model, const SparseRatings& ratings,
                                          const MaliciousMatrix& malicious,
                                          const ThetaGradNuclear& grad,
                                          const NuclearGradOptions& opts = {});

using RetrainFn = std::function<Eigen::MatrixXd(const MaliciousMatrix&)>;
using PredictionUtilityFn = std::function<double(const Eigen::MatrixXd&)>;

/// Central-difference oracle: perturbs each support entry of the fake block
/// by +-eps, retrains, and differences the utility. Values align with
/// malicious.entries().
std::vector<double> finite_diff_grad(const RetrainFn& retrain, const PredictionUtilityFn& utility,
                                     const MaliciousMatrix& malicious, double eps);

}  // namespace cfpoison

#endif  // CFPOISON_IMPLICIT_GRAD_HPP_
