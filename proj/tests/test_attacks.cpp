#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfpoison/attacks.hpp"
#include "cfpoison/data_io.hpp"
#include "test_util.hpp"

using namespace cfpoison;
using doctest::Approx;
using testutil::median;

namespace {

struct Instance {
  SparseRatings ratings;
  SolverConfig solver;
  UtilityConfig util;
};

Instance small_instance(std::uint64_t seed, double mu1 = 1.0, double mu2 = 0.0) {
  SyntheticOptions gen;
  gen.num_users = 12;
  gen.num_items = 8;
  gen.rank = 2;
  gen.obs_fraction = 0.6;
  gen.noise_sd = 0.05;
  gen.seed = seed;
  SyntheticData data = generate_synthetic(gen);

  Instance inst{data.ratings, {}, {}};
  inst.solver.rank = 2;
  inst.solver.lambda_u = inst.solver.lambda_v = 0.1;
  inst.solver.tol = 1e-8;
  inst.solver.max_sweeps = 5000;
  inst.solver.seed = seed + 1;
  inst.util.mu1 = mu1;
  inst.util.mu2 = mu2;
  if (mu2 != 0.0) {
    inst.util.target_items = {2};
    inst.util.target_weights = {2.0};
  }
  inst.util.baseline = fit_predict(inst.solver, inst.ratings, MaliciousMatrix::empty(8));
  inst.util.observed = inst.ratings.observed_mask();
  return inst;
}

}  // namespace

TEST_CASE("step schedules") {
  StepSchedule constant{StepSchedule::Kind::Constant, 0.3};
  CHECK(constant.at(1) == 0.3);
  CHECK(constant.at(9) == 0.3);
  StepSchedule decay{StepSchedule::Kind::InvSqrt, 1.0};
  CHECK(decay.at(1) == Approx(1.0));
  CHECK(decay.at(4) == Approx(0.5));
  CHECK_THROWS(decay.at(0));
}

TEST_CASE("a flat utility leaves the initialization untouched") {
  Instance inst = small_instance(40, 0.0, 0.0);  // both weights zero
  const AttackBudget budget(0.1, 3, 2.0);
  PgaConfig cfg;
  cfg.max_iter = 5;
  cfg.seed = 123;
  const MaliciousMatrix got = pga_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  const MaliciousMatrix init = sample_support(1, 8, 3, 2.0, 123);
  CHECK(got == init);
}

TEST_CASE("a zero step size leaves the initialization untouched") {
  Instance inst = small_instance(41);
  const AttackBudget budget(0.1, 3, 2.0);
  PgaConfig cfg;
  cfg.max_iter = 5;
  cfg.step.s0 = 0.0;
  cfg.seed = 9;
  const MaliciousMatrix got = pga_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  CHECK(got == sample_support(1, 8, 3, 2.0, 9));
}

TEST_CASE("pga output is always feasible and reproducible") {
  Instance inst = small_instance(42);
  const AttackBudget budget(0.2, 4, 2.0);
  PgaConfig cfg;
  cfg.max_iter = 8;
  cfg.step.s0 = 10.0;
  cfg.seed = 7;
  const MaliciousMatrix a = pga_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  CHECK(check_feasible(a, budget));
  CHECK(a.num_malicious() == 2);  // floor(0.2 * 12)
  const MaliciousMatrix b = pga_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  CHECK(a == b);
}

TEST_CASE("pga improves on the uniform initialization") {
  Instance inst = small_instance(43);
  const AttackBudget budget(0.2, 4, 2.0);
  PgaConfig cfg;
  cfg.max_iter = 25;
  cfg.step.s0 = 20.0;
  cfg.seed = 31;
  const MaliciousMatrix attack = pga_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  const MaliciousMatrix uniform = sample_support(2, 8, 4, 2.0, 31);
  const double u_attack =
      utility_value(fit_predict(inst.solver, inst.ratings, attack), inst.util);
  const double u_uniform =
      utility_value(fit_predict(inst.solver, inst.ratings, uniform), inst.util);
  CHECK(u_attack >= u_uniform);
}

TEST_CASE("prior estimation follows the zero-imputed moments") {
  SUBCASE("symmetric fully observed column") {
    SparseRatings M(2, 1, {{0, 0, 1.0}, {1, 0, -1.0}});
    const ItemPrior prior = estimate_prior(M);
    CHECK(prior.xi(0) == Approx(0.0));
    CHECK(prior.sigma2(0) == Approx(1.0));
  }
  SUBCASE("constant column floors the variance") {
    SparseRatings M(3, 1, {{0, 0, 0.7}, {1, 0, 0.7}, {2, 0, 0.7}});
    const ItemPrior prior = estimate_prior(M);
    CHECK(prior.xi(0) == Approx(0.7));
    CHECK(prior.sigma2(0) == Approx(1e-4));
  }
  SUBCASE("single observation among four users") {
    SparseRatings M(4, 1, {{1, 0, 2.0}});
    const ItemPrior prior = estimate_prior(M);
    CHECK(prior.xi(0) == Approx(0.5));
    CHECK(prior.sigma2(0) == Approx(0.75));
  }
  SUBCASE("per-rater statistics behind the flag") {
    SparseRatings M(4, 1, {{1, 0, 2.0}});
    const ItemPrior prior = estimate_prior(M, true);
    CHECK(prior.xi(0) == Approx(2.0));
    CHECK(prior.sigma2(0) == Approx(1e-4));  // single rater, floored
  }
  SUBCASE("broadcast repeats the mean row") {
    SparseRatings M(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {0, 1, -1.0}, {1, 1, -1.0}});
    const ItemPrior prior = estimate_prior(M);
    const Eigen::MatrixXd xi = prior.broadcast(3);
    CHECK(xi.rows() == 3);
    CHECK(xi(0, 0) == Approx(1.0));
    CHECK(xi(2, 1) == Approx(-1.0));
  }
}

TEST_CASE("prior-only dynamics contract to the prior mean") {
  // beta = 0, no noise: the update is pure mean reversion, so the dense
  // block converges to Xi, which is therefore a fixed point
  std::vector<RatingEntry> entries;
  const double col_mean[3] = {1.2, -0.8, 0.4};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      entries.push_back({i, j, col_mean[j] + (i < 2 ? 0.5 : -0.5)});
  SparseRatings M(4, 3, entries);

  SolverConfig solver;  // unused at beta = 0
  UtilityConfig util;
  util.baseline = Eigen::MatrixXd::Zero(4, 3);
  util.observed = M.observed_mask();

  SgldConfig cfg;
  cfg.beta = 0.0;
  cfg.noise = false;
  cfg.iterations = 400;
  cfg.step = {StepSchedule::Kind::Constant, 0.2};
  cfg.seed = 5;
  Eigen::MatrixXd raw;
  const AttackBudget budget(0.5, 2, 2.0);
  const MaliciousMatrix out = sgld_attack(M, budget, solver, util, cfg, &raw);

  const ItemPrior prior = estimate_prior(M);
  const Eigen::MatrixXd xi = prior.broadcast(2);
  CHECK((raw - xi).cwiseAbs().maxCoeff() < 1e-8);

  // the projection keeps the two largest-magnitude prior means per row
  for (int i = 0; i < out.num_malicious(); ++i) {
    REQUIRE(out.row(i).size() == 2);
    CHECK(out.row(i)[0].index == 0);
    CHECK(out.row(i)[1].index == 1);
  }
}

TEST_CASE("prior-only dynamics with noise average to the prior mean") {
  // Langevin sampling of the per-entry Gaussian prior: final samples across
  // repeated chains average to xi within a few standard errors
  SparseRatings M(2, 2, {{0, 0, 1.0}, {1, 0, 0.4}, {0, 1, -0.6}, {1, 1, -1.0}});
  SolverConfig solver;
  UtilityConfig util;
  util.baseline = Eigen::MatrixXd::Zero(2, 2);
  util.observed = M.observed_mask();
  const AttackBudget budget(1.0, 1, 2.0);

  const int chains = 400;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(2, 2);
  for (int c = 0; c < chains; ++c) {
    SgldConfig cfg;
    cfg.beta = 0.0;
    cfg.noise = true;
    cfg.iterations = 80;
    cfg.step = {StepSchedule::Kind::Constant, 0.3};
    cfg.seed = 1000 + c;
    Eigen::MatrixXd raw;
    sgld_attack(M, budget, solver, util, cfg, &raw);
    sum += raw;
    sumsq += raw.cwiseProduct(raw);
  }
  const Eigen::MatrixXd mean = sum / chains;
  const ItemPrior prior = estimate_prior(M);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double var = sumsq(i, j) / chains - mean(i, j) * mean(i, j);
      const double se = std::sqrt(var / chains);
      CHECK(std::abs(mean(i, j) - prior.xi(j)) <= 3.5 * se);
    }
}

TEST_CASE("sgld output is feasible and reproducible") {
  Instance inst = small_instance(50);
  const AttackBudget budget(0.2, 3, 2.0);
  SgldConfig cfg;
  cfg.beta = 0.6;
  cfg.iterations = 6;
  cfg.step = {StepSchedule::Kind::Constant, 0.05};
  cfg.seed = 77;
  const MaliciousMatrix a = sgld_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  CHECK(check_feasible(a, budget));
  for (int i = 0; i < a.num_malicious(); ++i) CHECK(a.row(i).size() == 3);
  const MaliciousMatrix b = sgld_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
  CHECK(a == b);
}

TEST_CASE("larger beta buys utility") {
  // median refit utility over seeds is non-decreasing across beta in
  // {0, 0.6, 10}
  std::vector<double> u0, u1, u2;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Instance inst = small_instance(60 + seed);
    const AttackBudget budget(0.2, 3, 2.0);
    auto run = [&](double beta) {
      SgldConfig cfg;
      cfg.beta = beta;
      cfg.iterations = 40;
      cfg.step = {StepSchedule::Kind::InvSqrt, 0.02};  // stable up to beta = 10 here
      cfg.seed = 900 + seed;
      const MaliciousMatrix mt = sgld_attack(inst.ratings, budget, inst.solver, inst.util, cfg);
      return utility_value(fit_predict(inst.solver, inst.ratings, mt), inst.util);
    };
    u0.push_back(run(0.0));
    u1.push_back(run(0.6));
    u2.push_back(run(10.0));
  }
  CHECK(median(u1) >= median(u0));
  CHECK(median(u2) >= median(u1));
}
