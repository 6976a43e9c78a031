#include "cfpoison/implicit_grad.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Cholesky>

namespace cfpoison {

std::vector<double> als_implicit_grad(const FactorModel& model, const SparseRatings& ratings,
                                      const MaliciousMatrix& malicious, const ThetaGradAls& grad,
                                      const AlsGradOptions& opts) {
  const int k = model.rank;
  const double residual = kkt_residual(model, ratings, malicious);
  if (residual > opts.convergence_warn)
    std::fprintf(stderr,
                 "cfpoison: als_implicit_grad called on a model with stationarity residual "
                 "%.3e; gradient may be unreliable\n",
                 residual);

  // fake-user Grams over each user's own rated set
  std::vector<Eigen::LLT<Eigen::MatrixXd>> user_solver(malicious.num_malicious());
  for (int i = 0; i < malicious.num_malicious(); ++i) {
    Eigen::MatrixXd gram = model.lambda_u * Eigen::MatrixXd::Identity(k, k);
    for (const IndexedValue& o : malicious.row(i)) {
      const auto v = model.V.row(o.index).transpose();
      gram.noalias() += v * v.transpose();
    }
    user_solver[i].compute(gram);
  }

  // item Grams over all raters, computed only for items with fake raters
  std::unordered_map<int, Eigen::LLT<Eigen::MatrixXd>> item_solver;
  for (int j = 0; j < malicious.num_items(); ++j) {
    if (malicious.col(j).empty()) continue;
    Eigen::MatrixXd gram = model.lambda_v * Eigen::MatrixXd::Identity(k, k);
    for (const IndexedValue& o : ratings.col(j)) {
      const auto u = model.U.row(o.index).transpose();
      gram.noalias() += u * u.transpose();
    }
    for (const IndexedValue& o : malicious.col(j)) {
      const auto u = model.U_tilde.row(o.index).transpose();
      gram.noalias() += u * u.transpose();
    }
    item_solver.emplace(j, Eigen::LLT<Eigen::MatrixXd>(gram));
  }

  std::vector<double> out;
  out.reserve(malicious.entries().size());
  for (const RatingEntry& r : malicious.entries()) {
    const Eigen::VectorXd du = user_solver[r.user].solve(model.V.row(r.item).transpose());
    const Eigen::VectorXd dv = item_solver.at(r.item).solve(model.U_tilde.row(r.user).transpose());
    out.push_back(du.dot(grad.dU_tilde.row(r.user)) + dv.dot(grad.dV.row(r.item)));
  }
  return out;
}

std::vector<double> nuclear_implicit_grad(const NuclearModel& model, const SparseRatings& ratings,
                                          const MaliciousMatrix& malicious,
                                          const ThetaGradNuclear& grad,
                                          const NuclearGradOptions& opts) {
  if (opts.smoothing.tau <= 0.0)
    throw std::invalid_argument("nuclear_implicit_grad: tau must be positive");
  const int rho = model.rank();
  if (rho < 1) throw std::invalid_argument("nuclear_implicit_grad: model has rank zero");
  const Eigen::VectorXd scale = model.sigma.array() + model.lambda;  // Sigma + lambda I

  // At support entries the extended observation sets of the per-entry
  // systems coincide with the plain support sets, so one factorization per
  // fake user and per touched item covers every entry.
  std::vector<Eigen::LLT<Eigen::MatrixXd>> user_solver(malicious.num_malicious());
  for (int i = 0; i < malicious.num_malicious(); ++i) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rho, rho);
    for (const IndexedValue& o : malicious.row(i)) {
      const auto v = model.V.row(o.index).transpose();
      gram.noalias() += v * v.transpose();
    }
    Eigen::MatrixXd sys = scale.asDiagonal() * gram * scale.asDiagonal();
    sys.diagonal().array() += opts.smoothing.tau;
    user_solver[i].compute(sys);
  }

  std::unordered_map<int, Eigen::LLT<Eigen::MatrixXd>> item_solver;
  for (int j = 0; j < malicious.num_items(); ++j) {
    if (malicious.col(j).empty()) continue;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(rho, rho);
    for (const IndexedValue& o : ratings.col(j)) {
      const auto u = model.U.row(o.index).transpose();
      gram.noalias() += u * u.transpose();
    }
    for (const IndexedValue& o : malicious.col(j)) {
      const auto u = model.U_tilde.row(o.index).transpose();
      gram.noalias() += u * u.transpose();
    }
    Eigen::MatrixXd sys = scale.asDiagonal() * gram * scale.asDiagonal();
    sys.diagonal().array() += opts.smoothing.tau;
    item_solver.emplace(j, Eigen::LLT<Eigen::MatrixXd>(sys));
  }

  std::vector<double> out;
  out.reserve(malicious.entries().size());
  for (const RatingEntry& r : malicious.entries()) {
    const Eigen::VectorXd du =
        user_solver[r.user].solve(scale.cwiseProduct(model.V.row(r.item).transpose()));
    const Eigen::VectorXd dv =
        item_solver.at(r.item).solve(scale.cwiseProduct(model.U_tilde.row(r.user).transpose()));
    double g = du.dot(grad.dU_tilde.row(r.user)) + dv.dot(grad.dV.row(r.item));
    if (opts.sigma_path) {
      for (int t = 0; t < rho; ++t) {
        const double prod = model.U_tilde(r.user, t) * model.V(r.item, t);
        double dsig;
        if (std::abs(prod) >= opts.sigma_eps)
          dsig = 1.0 / prod;
        else if (prod == 0.0)
          dsig = 0.0;
        else
          dsig = prod > 0.0 ? opts.sigma_clamp : -opts.sigma_clamp;
        g += grad.dsigma(t) * dsig;
      }
    }
    out.push_back(g);
  }
  return out;
}

std::vector<double> finite_diff_grad(const RetrainFn& retrain, const PredictionUtilityFn& utility,
                                     const MaliciousMatrix& malicious, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("finite_diff_grad: eps must be positive");
  std::vector<double> values;
  values.reserve(malicious.entries().size());
  for (const RatingEntry& r : malicious.entries()) values.push_back(r.value);

  std::vector<double> out(values.size());
  for (std::size_t e = 0; e < values.size(); ++e) {
    std::vector<double> bumped = values;
    bumped[e] = values[e] + eps;
    const double up = utility(retrain(malicious.with_values(bumped)));
    bumped[e] = values[e] - eps;
    const double down = utility(retrain(malicious.with_values(bumped)));
    out[e] = (up - down) / (2.0 * eps);
  }
  return out;
}

}  // namespace cfpoison
