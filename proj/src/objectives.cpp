#include "cfpoison/objectives.hpp"

#include <stdexcept>

namespace cfpoison {

namespace {

void check_shapes(const Eigen::MatrixXd& Mhat, const UtilityConfig& cfg) {
  if (Mhat.rows() != cfg.baseline.rows() || Mhat.cols() != cfg.baseline.cols())
    throw std::invalid_argument("utility: prediction/baseline shape mismatch");
  if (Mhat.rows() != cfg.observed.rows() || Mhat.cols() != cfg.observed.cols())
    throw std::invalid_argument("utility: prediction/mask shape mismatch");
  if (cfg.target_items.size() != cfg.target_weights.size())
    throw std::invalid_argument("utility: target items/weights mismatch");
  for (int j : cfg.target_items)
    if (j < 0 || j >= Mhat.cols()) throw std::invalid_argument("utility: target item out of range");
}

}  // namespace

double utility_value(const Eigen::MatrixXd& Mhat, const UtilityConfig& cfg) {
  check_shapes(Mhat, cfg);
  double avail = 0.0;
  if (cfg.mu1 != 0.0) {
    for (int j = 0; j < Mhat.cols(); ++j)
      for (int i = 0; i < Mhat.rows(); ++i)
        if (!cfg.observed(i, j)) {
          const double d = Mhat(i, j) - cfg.baseline(i, j);
          avail += d * d;
        }
  }
  double eva = 0.0;
  for (std::size_t t = 0; t < cfg.target_items.size(); ++t)
    eva += cfg.target_weights[t] * Mhat.col(cfg.target_items[t]).sum();
  return cfg.mu1 * avail + cfg.mu2 * eva;
}

Eigen::MatrixXd utility_grad_mhat(const Eigen::MatrixXd& Mhat, const UtilityConfig& cfg) {
  check_shapes(Mhat, cfg);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(Mhat.rows(), Mhat.cols());
  if (cfg.mu1 != 0.0) {
    for (int j = 0; j < Mhat.cols(); ++j)
      for (int i = 0; i < Mhat.rows(); ++i)
        if (!cfg.observed(i, j)) grad(i, j) = cfg.mu1 * 2.0 * (Mhat(i, j) - cfg.baseline(i, j));
  }
  for (std::size_t t = 0; t < cfg.target_items.size(); ++t)
    grad.col(cfg.target_items[t]).array() += cfg.mu2 * cfg.target_weights[t];
  return grad;
}

ThetaGradAls grad_r_theta_als(const FactorModel& model, const Eigen::MatrixXd& G) {
  if (G.rows() != model.U.rows() || G.cols() != model.V.rows())
    throw std::invalid_argument("grad_r_theta_als: gradient shape mismatch");
  ThetaGradAls out;
  out.dU = G * model.V;
  out.dU_tilde = Eigen::MatrixXd::Zero(model.U_tilde.rows(), model.rank);
  out.dV = G.transpose() * model.U;
  return out;
}

ThetaGradNuclear grad_r_theta_nuclear(const NuclearModel& model, const Eigen::MatrixXd& G) {
  if (G.rows() != model.U.rows() || G.cols() != model.V.rows())
    throw std::invalid_argument("grad_r_theta_nuclear: gradient shape mismatch");
  ThetaGradNuclear out;
  out.dU = G * model.V * model.sigma.asDiagonal();
  out.dU_tilde = Eigen::MatrixXd::Zero(model.U_tilde.rows(), model.rank());
  out.dV = G.transpose() * model.U * model.sigma.asDiagonal();
  out.dsigma = (model.U.transpose() * G * model.V).diagonal();
  return out;
}

}  // namespace cfpoison
