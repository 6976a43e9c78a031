#include "cfpoison/nuclear.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace cfpoison {

namespace {

constexpr double kRankTolFactor = 1e-6;  // rho cutoff relative to sigma_1

struct Svd {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;
};

Svd thin_svd(const Eigen::MatrixXd& A) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double data_fit(const Eigen::MatrixXd& Z, const SparseRatings& ratings,
                const MaliciousMatrix& malicious) {
  const int m = ratings.num_users();
  double fit = 0.0;
  for (const RatingEntry& r : ratings.entries()) {
    const double res = r.value - Z(r.user, r.item);
    fit += res * res;
  }
  for (const RatingEntry& r : malicious.entries()) {
    const double res = r.value - Z(m + r.user, r.item);
    fit += res * res;
  }
  return fit;
}

}  // namespace

Eigen::MatrixXd shrink_singular_values(const Eigen::MatrixXd& A, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("shrink_singular_values: negative threshold");
  if (threshold == 0.0) return A;
  Svd svd = thin_svd(A);
  Eigen::VectorXd shrunk = (svd.S.array() - threshold).max(0.0).matrix();
  return svd.U * shrunk.asDiagonal() * svd.V.transpose();
}

double svt_objective(const Eigen::MatrixXd& Z, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious, double lambda) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z);
  return data_fit(Z, ratings, malicious) + 2.0 * lambda * svd.singularValues().sum();
}

NuclearModel svt_fit(const SparseRatings& ratings, const MaliciousMatrix& malicious,
                     double lambda, const SvtOptions& opts, SvtFitInfo* info) {
  if (lambda <= 0.0) throw std::invalid_argument("svt_fit: lambda must be positive");
  if (opts.step <= 0.0 || opts.step > 1.0) throw std::invalid_argument("svt_fit: step out of (0,1]");
  if (malicious.num_items() != ratings.num_items())
    throw std::invalid_argument("svt_fit: item count mismatch between blocks");
  const int m = ratings.num_users();
  const int mt = malicious.num_malicious();
  const int n = ratings.num_items();

  Eigen::MatrixXd Z;
  if (opts.init != nullptr) {
    if (opts.init->rows() != m + mt || opts.init->cols() != n)
      throw std::invalid_argument("svt_fit: init shape mismatch");
    Z = *opts.init;
  } else {
    Z = Eigen::MatrixXd::Zero(m + mt, n);
  }

  double prev = svt_objective(Z, ratings, malicious, lambda);
  if (info != nullptr) {
    *info = SvtFitInfo{};
    info->objective_history.push_back(prev);
  }

  bool converged = false;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    Eigen::MatrixXd Y = Z;
    for (const RatingEntry& r : ratings.entries())
      Y(r.user, r.item) -= opts.step * 2.0 * (Z(r.user, r.item) - r.value);
    for (const RatingEntry& r : malicious.entries())
      Y(m + r.user, r.item) -= opts.step * 2.0 * (Z(m + r.user, r.item) - r.value);

    Svd svd = thin_svd(Y);
    Eigen::VectorXd shrunk = (svd.S.array() - opts.step * 2.0 * lambda).max(0.0).matrix();
    Z.noalias() = svd.U * shrunk.asDiagonal() * svd.V.transpose();

    const double obj = data_fit(Z, ratings, malicious) + 2.0 * lambda * shrunk.sum();
    if (!std::isfinite(obj)) throw std::runtime_error("svt_fit: objective diverged");
    if (info != nullptr) {
      info->objective_history.push_back(obj);
      info->iterations = iter + 1;
    }
    if (prev - obj < opts.tol * std::max(1.0, std::abs(prev))) {
      converged = true;
      break;
    }
    prev = obj;
  }
  if (!converged)
    throw std::runtime_error("svt_fit: no convergence after max_iter; step may be too large");
  if (info != nullptr) info->converged = true;

  NuclearModel model;
  model.lambda = lambda;
  Svd svd = thin_svd(Z);
  const double top = svd.S.size() > 0 ? svd.S(0) : 0.0;
  int rho = 0;
  while (rho < svd.S.size() && svd.S(rho) > kRankTolFactor * top) ++rho;
  model.U = svd.U.topRows(m).leftCols(rho);
  model.U_tilde = svd.U.bottomRows(mt).leftCols(rho);
  model.V = svd.V.leftCols(rho);
  model.sigma = svd.S.head(rho);
  model.X = Z.topRows(m);
  model.X_tilde = Z.bottomRows(mt);
  return model;
}

Eigen::MatrixXd predict_nuclear(const NuclearModel& model) { return model.X; }

DualVariables dual_w(const NuclearModel& model, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious) {
  if (model.lambda <= 0.0) throw std::invalid_argument("dual_w: model lambda must be positive");
  const Eigen::VectorXd scaled = model.sigma.array() + model.lambda;
  DualVariables out;
  out.normal.reserve(ratings.entries().size());
  for (const RatingEntry& r : ratings.entries()) {
    const double factor_form =
        model.U.row(r.user).cwiseProduct(scaled.transpose()).dot(model.V.row(r.item));
    out.normal.push_back((r.value - factor_form) / model.lambda);
  }
  out.malicious.reserve(malicious.entries().size());
  for (const RatingEntry& r : malicious.entries()) {
    const double factor_form =
        model.U_tilde.row(r.user).cwiseProduct(scaled.transpose()).dot(model.V.row(r.item));
    out.malicious.push_back((r.value - factor_form) / model.lambda);
  }
  return out;
}

}  // namespace cfpoison
