#include "cfpoison/als.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace cfpoison {

namespace {

// (lambda I + sum v v^T) u = sum t v, assembled over one row's observations.
Eigen::VectorXd solve_row(const Eigen::MatrixXd& factors, const std::vector<IndexedValue>& obs,
                          double lambda) {
  const int k = static_cast<int>(factors.cols());
  if (obs.empty()) return Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (const IndexedValue& o : obs) {
    const auto f = factors.row(o.index).transpose();
    gram.noalias() += f * f.transpose();
    rhs.noalias() += o.value * f;
  }
  return Eigen::LLT<Eigen::MatrixXd>(gram).solve(rhs);
}

}  // namespace

Eigen::VectorXd ridge_row_solve(const std::vector<Eigen::VectorXd>& dirs,
                                const std::vector<double>& targets, double lambda) {
  if (dirs.size() != targets.size()) throw std::invalid_argument("ridge_row_solve: size mismatch");
  if (dirs.empty()) throw std::invalid_argument("ridge_row_solve: empty system");
  const int k = static_cast<int>(dirs.front().size());
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  for (std::size_t e = 0; e < dirs.size(); ++e) {
    gram.noalias() += dirs[e] * dirs[e].transpose();
    rhs.noalias() += targets[e] * dirs[e];
  }
  return Eigen::LLT<Eigen::MatrixXd>(gram).solve(rhs);
}

double als_objective(const FactorModel& model, const SparseRatings& ratings,
                     const MaliciousMatrix& malicious) {
  double fit = 0.0;
  for (const RatingEntry& r : ratings.entries()) {
    const double res = r.value - model.U.row(r.user).dot(model.V.row(r.item));
    fit += res * res;
  }
  for (const RatingEntry& r : malicious.entries()) {
    const double res = r.value - model.U_tilde.row(r.user).dot(model.V.row(r.item));
    fit += res * res;
  }
  return fit + model.lambda_u * (model.U.squaredNorm() + model.U_tilde.squaredNorm()) +
         model.lambda_v * model.V.squaredNorm();
}

FactorModel als_fit(const SparseRatings& ratings, const MaliciousMatrix& malicious,
                    double lambda_u, double lambda_v, int rank, const AlsOptions& opts,
                    AlsFitInfo* info) {
  if (lambda_u <= 0.0 || lambda_v <= 0.0)
    throw std::invalid_argument("als_fit: regularizers must be positive");
  if (ratings.num_entries() == 0) throw std::invalid_argument("als_fit: no observed ratings");
  if (malicious.num_items() != ratings.num_items())
    throw std::invalid_argument("als_fit: item count mismatch between blocks");
  const int m = ratings.num_users();
  const int mt = malicious.num_malicious();
  const int n = ratings.num_items();
  if (rank < 1 || rank > std::min(m + mt, n)) throw std::invalid_argument("als_fit: bad rank");

  FactorModel model;
  model.lambda_u = lambda_u;
  model.lambda_v = lambda_v;
  model.rank = rank;
  if (opts.warm_start != nullptr) {
    const FactorModel& w = *opts.warm_start;
    if (w.U.rows() != m || w.U_tilde.rows() != mt || w.V.rows() != n || w.rank != rank)
      throw std::invalid_argument("als_fit: warm start shape mismatch");
    model.U = w.U;
    model.U_tilde = w.U_tilde;
    model.V = w.V;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
    auto init = [&](int rows) {
      Eigen::MatrixXd f(rows, rank);
      for (int i = 0; i < rows; ++i)
        for (int t = 0; t < rank; ++t) f(i, t) = scale * gauss(rng);
      return f;
    };
    model.U = init(m);
    model.U_tilde = init(mt);
    model.V = init(n);
  }

  double prev = als_objective(model, ratings, malicious);
  if (info != nullptr) {
    *info = AlsFitInfo{};
    info->objective_history.push_back(prev);
  }

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    const FactorModel before = model;
    for (int i = 0; i < m; ++i) model.U.row(i) = solve_row(model.V, ratings.row(i), lambda_u);
    for (int i = 0; i < mt; ++i)
      model.U_tilde.row(i) = solve_row(model.V, malicious.row(i), lambda_u);
    for (int j = 0; j < n; ++j) {
      // item rows see both user blocks; malicious raters are appended after
      // the normal ones in canonical order
      const std::vector<IndexedValue>& norm = ratings.col(j);
      const std::vector<IndexedValue>& mal = malicious.col(j);
      Eigen::MatrixXd gram = lambda_v * Eigen::MatrixXd::Identity(rank, rank);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rank);
      for (const IndexedValue& o : norm) {
        const auto f = model.U.row(o.index).transpose();
        gram.noalias() += f * f.transpose();
        rhs.noalias() += o.value * f;
      }
      for (const IndexedValue& o : mal) {
        const auto f = model.U_tilde.row(o.index).transpose();
        gram.noalias() += f * f.transpose();
        rhs.noalias() += o.value * f;
      }
      if (norm.empty() && mal.empty())
        model.V.row(j).setZero();
      else
        model.V.row(j) = Eigen::LLT<Eigen::MatrixXd>(gram).solve(rhs);
    }

    const double obj = als_objective(model, ratings, malicious);
    if (!std::isfinite(obj)) throw std::runtime_error("als_fit: objective diverged");
    if (info != nullptr) {
      info->objective_history.push_back(obj);
      info->sweeps = sweep + 1;
    }
    // The stationarity residual scales with the per-sweep iterate change,
    // not with the objective decrease (which goes quadratically); require
    // both below tol so a tol of 1e-8 yields residuals near 1e-7.
    const double theta_norm = std::sqrt(model.U.squaredNorm() + model.U_tilde.squaredNorm() +
                                        model.V.squaredNorm());
    const double change =
        std::sqrt((model.U - before.U).squaredNorm() +
                  (model.U_tilde - before.U_tilde).squaredNorm() +
                  (model.V - before.V).squaredNorm());
    if (prev - obj < opts.tol * std::max(1.0, std::abs(prev)) &&
        change < opts.tol * std::max(1.0, theta_norm)) {
      if (info != nullptr) info->converged = true;
      break;
    }
    prev = obj;
  }
  return model;
}

Eigen::MatrixXd predict_als(const FactorModel& model) { return model.U * model.V.transpose(); }

double kkt_residual(const FactorModel& model, const SparseRatings& ratings,
                    const MaliciousMatrix& malicious) {
  double worst = 0.0;
  for (int i = 0; i < ratings.num_users(); ++i) {
    Eigen::VectorXd res = model.lambda_u * model.U.row(i).transpose();
    for (const IndexedValue& o : ratings.row(i))
      res -= (o.value - model.U.row(i).dot(model.V.row(o.index))) * model.V.row(o.index).transpose();
    worst = std::max(worst, res.norm());
  }
  for (int i = 0; i < malicious.num_malicious(); ++i) {
    Eigen::VectorXd res = model.lambda_u * model.U_tilde.row(i).transpose();
    for (const IndexedValue& o : malicious.row(i))
      res -= (o.value - model.U_tilde.row(i).dot(model.V.row(o.index))) *
             model.V.row(o.index).transpose();
    worst = std::max(worst, res.norm());
  }
  for (int j = 0; j < ratings.num_items(); ++j) {
    Eigen::VectorXd res = model.lambda_v * model.V.row(j).transpose();
    for (const IndexedValue& o : ratings.col(j))
      res -= (o.value - model.U.row(o.index).dot(model.V.row(j))) * model.U.row(o.index).transpose();
    for (const IndexedValue& o : malicious.col(j))
      res -= (o.value - model.U_tilde.row(o.index).dot(model.V.row(j))) *
             model.U_tilde.row(o.index).transpose();
    worst = std::max(worst, res.norm());
  }
  return worst;
}

}  // namespace cfpoison
