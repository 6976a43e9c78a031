#include "cfpoison/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace cfpoison {

double StepSchedule::at(int t) const {
  if (t < 1) throw std::invalid_argument("StepSchedule: iterations are 1-based");
  switch (kind) {
    case Kind::Constant:
      return s0;
    case Kind::InvSqrt:
      return s0 / std::sqrt(static_cast<double>(t));
  }
  return s0;
}

SolverSession::SolverSession(const SolverConfig& cfg, const SparseRatings& ratings)
    : cfg_(cfg), ratings_(&ratings) {}

const Eigen::MatrixXd& SolverSession::fit(const MaliciousMatrix& mt) {
  if (cfg_.kind == SolverConfig::Kind::Als) {
    AlsOptions opts;
    opts.tol = cfg_.tol;
    opts.max_iter = cfg_.max_sweeps;
    opts.seed = cfg_.seed;
    const bool can_warm = fitted_ && als_model_.U_tilde.rows() == mt.num_malicious();
    if (can_warm) opts.warm_start = &als_model_;
    als_model_ = als_fit(*ratings_, mt, cfg_.lambda_u, cfg_.lambda_v, cfg_.rank, opts);
    prediction_ = predict_als(als_model_);
  } else {
    SvtOptions opts;
    opts.step = cfg_.svt_step;
    opts.tol = cfg_.tol;
    opts.max_iter = cfg_.svt_max_iter;
    const bool can_warm =
        fitted_ && nuclear_iterate_.rows() == ratings_->num_users() + mt.num_malicious();
    if (can_warm) opts.init = &nuclear_iterate_;
    nuclear_model_ = svt_fit(*ratings_, mt, cfg_.lambda, opts);
    nuclear_iterate_.resize(ratings_->num_users() + mt.num_malicious(), ratings_->num_items());
    nuclear_iterate_ << nuclear_model_.X, nuclear_model_.X_tilde;
    prediction_ = predict_nuclear(nuclear_model_);
  }
  fitted_ = true;
  return prediction_;
}

std::vector<double> SolverSession::utility_grad(const MaliciousMatrix& mt,
                                                const UtilityConfig& util) const {
  if (!fitted_) throw std::logic_error("SolverSession: utility_grad before fit");
  const Eigen::MatrixXd G = utility_grad_mhat(prediction_, util);
  if (cfg_.kind == SolverConfig::Kind::Als) {
    AlsGradOptions opts;
    opts.convergence_warn = cfg_.grad_warn;
    return als_implicit_grad(als_model_, *ratings_, mt, grad_r_theta_als(als_model_, G), opts);
  }
  NuclearGradOptions opts;
  opts.smoothing = cfg_.smoothing;
  opts.sigma_path = cfg_.sigma_path;
  return nuclear_implicit_grad(nuclear_model_, *ratings_, mt,
                               grad_r_theta_nuclear(nuclear_model_, G), opts);
}

Eigen::MatrixXd fit_predict(const SolverConfig& cfg, const SparseRatings& ratings,
                            const MaliciousMatrix& mt) {
  SolverSession session(cfg, ratings);
  return session.fit(mt);
}

MaliciousMatrix pga_attack(const SparseRatings& ratings, const AttackBudget& budget,
                           const SolverConfig& solver, const UtilityConfig& util,
                           const PgaConfig& cfg) {
  const int num_fake = budget.num_malicious(ratings.num_users());
  MaliciousMatrix current = sample_support(num_fake, ratings.num_items(), budget.max_items,
                                           budget.rating_cap, cfg.seed);
  SolverSession session(solver, ratings);

  MaliciousMatrix best = current;
  double best_utility = -std::numeric_limits<double>::infinity();
  bool converged = false;

  for (int t = 0;; ++t) {
    session.fit(current);
    const double value = utility_value(session.prediction(), util);
    if (value > best_utility) {
      best_utility = value;
      best = current;
    }
    if (t >= cfg.max_iter || converged) break;

    const std::vector<double> grad = session.utility_grad(current, util);
    const double step = cfg.step.at(t + 1);
    std::vector<double> values;
    values.reserve(grad.size());
    double change_sq = 0.0;
    for (std::size_t e = 0; e < grad.size(); ++e) {
      const double before = current.entries()[e].value;
      const double after =
          std::clamp(before + step * grad[e], -budget.rating_cap, budget.rating_cap);
      values.push_back(after);
      change_sq += (after - before) * (after - before);
    }
    current = current.with_values(values);
    converged = std::sqrt(change_sq) < cfg.conv_tol;
  }
  return best;
}

Eigen::MatrixXd ItemPrior::broadcast(int rows) const {
  return Eigen::VectorXd::Ones(rows) * xi.transpose();
}

ItemPrior estimate_prior(const SparseRatings& ratings, bool divide_by_observed) {
  constexpr double kVarianceFloor = 1e-4;
  const int n = ratings.num_items();
  const double m = ratings.num_users();
  ItemPrior prior;
  prior.xi = Eigen::VectorXd::Zero(n);
  prior.sigma2 = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const auto& col = ratings.col(j);
    const double denom = divide_by_observed ? static_cast<double>(col.size()) : m;
    double sum = 0.0;
    for (const IndexedValue& o : col) sum += o.value;
    const double mean = denom > 0 ? sum / denom : 0.0;
    double ss = 0.0;
    for (const IndexedValue& o : col) ss += (o.value - mean) * (o.value - mean);
    if (!divide_by_observed) ss += (m - static_cast<double>(col.size())) * mean * mean;
    const double var = denom > 0 ? ss / denom : 0.0;
    prior.xi(j) = mean;
    prior.sigma2(j) = std::max(var, kVarianceFloor);
  }
  return prior;
}

MaliciousMatrix sgld_attack(const SparseRatings& ratings, const AttackBudget& budget,
                            const SolverConfig& solver, const UtilityConfig& util,
                            const SgldConfig& cfg, Eigen::MatrixXd* raw_out) {
  const int num_fake = budget.num_malicious(ratings.num_users());
  const int n = ratings.num_items();
  const ItemPrior prior = estimate_prior(ratings, cfg.prior_divide_by_observed);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd block(num_fake, n);
  for (int i = 0; i < num_fake; ++i)
    for (int j = 0; j < n; ++j) block(i, j) = prior.xi(j) + std::sqrt(prior.sigma2(j)) * gauss(rng);

  SolverSession session(solver, ratings);
  for (int t = 1; t <= cfg.iterations; ++t) {
    std::vector<double> grad;
    if (cfg.beta != 0.0) {
      const MaliciousMatrix mt = MaliciousMatrix::from_dense(block);
      session.fit(mt);
      grad = session.utility_grad(mt, util);  // row-major entry order
    }
    const double step = cfg.step.at(t);
    const double noise_sd = std::sqrt(step);
    std::size_t e = 0;
    for (int i = 0; i < num_fake; ++i) {
      for (int j = 0; j < n; ++j, ++e) {
        double g = -(block(i, j) - prior.xi(j)) / prior.sigma2(j);
        if (cfg.beta != 0.0) g += cfg.beta * grad[e];
        block(i, j) += 0.5 * step * g;
        if (cfg.noise) block(i, j) += noise_sd * gauss(rng);
      }
    }
  }
  if (raw_out != nullptr) *raw_out = block;
  return truncate_ratings(select_top_b(MaliciousMatrix::from_dense(block), budget.max_items),
                          budget.rating_cap);
}

}  // namespace cfpoison
