#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cfpoison/data_io.hpp"
#include "cfpoison/nuclear.hpp"

using namespace cfpoison;
using doctest::Approx;

namespace {

// independent oracle: soft-threshold the singular values via a fresh SVD
Eigen::MatrixXd shrink_oracle(const Eigen::MatrixXd& A, double threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  for (int t = 0; t < s.size(); ++t) s(t) = std::max(s(t) - threshold, 0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double spectral_norm(const Eigen::MatrixXd& A) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

}  // namespace

TEST_CASE("shrink handles the diagonal example") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = 1.0;
  const Eigen::MatrixXd S = shrink_singular_values(A, 2.0);
  CHECK(S(0, 0) == Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(S(1, 1)) < 1e-12);
  CHECK(std::abs(S(0, 1)) < 1e-12);
}

TEST_CASE("shrink with zero threshold is the identity") {
  Eigen::MatrixXd A(2, 3);
  A << 1, -2, 0.5, 3, 0, -1;
  CHECK((shrink_singular_values(A, 0.0) - A).norm() == 0.0);
}

TEST_CASE("shrink past the top singular value gives zero") {
  Eigen::MatrixXd A(2, 3);
  A << 1, -2, 0.5, 3, 0, -1;
  const double smax = spectral_norm(A);
  CHECK(shrink_singular_values(A, smax * 1.01).norm() < 1e-12);
}

TEST_CASE("shrink agrees with the SVD-plus-soft-threshold oracle") {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::MatrixXd A(6, 4);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = gauss(rng);
    const double thr = 0.3 * (trial + 1);
    CHECK((shrink_singular_values(A, thr) - shrink_oracle(A, thr)).norm() <= 1e-8);
  }
}

TEST_CASE("huge lambda collapses the completion to zero") {
  SyntheticOptions gen;
  gen.num_users = 6;
  gen.num_items = 5;
  gen.rank = 2;
  gen.obs_fraction = 0.8;
  gen.seed = 44;
  const SyntheticData data = generate_synthetic(gen);
  const double lam = 10.0 * spectral_norm(data.ratings.to_dense());
  const NuclearModel model = svt_fit(data.ratings, MaliciousMatrix::empty(5), lam);
  CHECK(model.X.norm() == 0.0);
  CHECK(model.rank() == 0);
}

TEST_CASE("negligible penalty on a fully observed matrix reproduces it") {
  SyntheticOptions gen;
  gen.num_users = 6;
  gen.num_items = 5;
  gen.rank = 3;
  gen.obs_fraction = 1.0;
  gen.seed = 8;
  const SyntheticData data = generate_synthetic(gen);
  SvtOptions opts;
  opts.tol = 1e-13;
  const NuclearModel model = svt_fit(data.ratings, MaliciousMatrix::empty(5), 1e-6, opts);
  const Eigen::MatrixXd M = data.ratings.to_dense();
  CHECK((model.X - M).norm() / M.norm() <= 1e-3);
}

TEST_CASE("objective descends monotonically from the zero start") {
  SyntheticOptions gen;
  gen.num_users = 8;
  gen.num_items = 6;
  gen.rank = 2;
  gen.obs_fraction = 0.6;
  gen.noise_sd = 0.05;
  gen.seed = 3;
  const SyntheticData data = generate_synthetic(gen);
  MaliciousMatrix mt = sample_support(2, 6, 3, 2.0, 5);
  SvtFitInfo info;
  svt_fit(data.ratings, mt, 0.4, {}, &info);
  REQUIRE(info.objective_history.size() >= 2);
  for (std::size_t s = 1; s < info.objective_history.size(); ++s)
    CHECK(info.objective_history[s] <= info.objective_history[s - 1] + 1e-12);
  CHECK(info.objective_history.back() <= info.objective_history.front());
}

TEST_CASE("the convex objective lands at the same value from any start") {
  SyntheticOptions gen;
  gen.num_users = 7;
  gen.num_items = 6;
  gen.rank = 2;
  gen.obs_fraction = 0.7;
  gen.seed = 21;
  const SyntheticData data = generate_synthetic(gen);
  const double tol = 1e-11;

  SvtOptions from_zero;
  from_zero.tol = tol;
  SvtFitInfo info_zero;
  const NuclearModel a =
      svt_fit(data.ratings, MaliciousMatrix::empty(6), 0.3, from_zero, &info_zero);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd start(7, 6);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 6; ++j) start(i, j) = gauss(rng);
  SvtOptions from_random = from_zero;
  from_random.init = &start;
  SvtFitInfo info_random;
  const NuclearModel b =
      svt_fit(data.ratings, MaliciousMatrix::empty(6), 0.3, from_random, &info_random);

  const double fa = info_zero.objective_history.back();
  const double fb = info_random.objective_history.back();
  CHECK(std::abs(fa - fb) <= 10.0 * tol * std::max(1.0, std::abs(fa)));
}

TEST_CASE("factorization invariants hold after a fit") {
  SyntheticOptions gen;
  gen.num_users = 9;
  gen.num_items = 7;
  gen.rank = 3;
  gen.obs_fraction = 0.8;
  gen.noise_sd = 0.02;
  gen.seed = 12;
  const SyntheticData data = generate_synthetic(gen);
  MaliciousMatrix mt = sample_support(2, 7, 4, 2.0, 9);
  const NuclearModel model = svt_fit(data.ratings, mt, 0.3);

  REQUIRE(model.rank() >= 1);
  Eigen::MatrixXd stacked_u(model.U.rows() + model.U_tilde.rows(), model.rank());
  stacked_u << model.U, model.U_tilde;
  Eigen::MatrixXd stacked_x(model.X.rows() + model.X_tilde.rows(), model.X.cols());
  stacked_x << model.X, model.X_tilde;

  const Eigen::MatrixXd recon = stacked_u * model.sigma.asDiagonal() * model.V.transpose();
  CHECK((recon - stacked_x).norm() <= 1e-8 * std::max(1.0, stacked_x.norm()));

  const int rho = model.rank();
  CHECK((stacked_u.transpose() * stacked_u - Eigen::MatrixXd::Identity(rho, rho)).norm() <= 1e-8);
  CHECK((model.V.transpose() * model.V - Eigen::MatrixXd::Identity(rho, rho)).norm() <= 1e-8);
  for (int t = 1; t < rho; ++t) CHECK(model.sigma(t) <= model.sigma(t - 1));
  CHECK(model.sigma(rho - 1) > 0.0);

  // predictions are the normal block
  CHECK((predict_nuclear(model) - model.X).norm() == 0.0);
}

TEST_CASE("rank-1 recovery through the nuclear penalty") {
  SyntheticOptions gen;
  gen.num_users = 10;
  gen.num_items = 8;
  gen.rank = 1;
  gen.obs_fraction = 0.8;
  gen.seed = 33;
  const SyntheticData data = generate_synthetic(gen);
  SvtOptions opts;
  opts.tol = 1e-12;
  const NuclearModel model = svt_fit(data.ratings, MaliciousMatrix::empty(8), 0.05, opts);
  const double rmse =
      (model.X - data.ground_truth).norm() / std::sqrt(static_cast<double>(10 * 8));
  CHECK(rmse <= 0.1);
}

TEST_CASE("dual variables rescale the factor-form residual") {
  NuclearModel model;
  model.lambda = 0.5;
  model.U = Eigen::MatrixXd::Ones(1, 1);
  model.U_tilde.resize(0, 1);
  model.V = Eigen::MatrixXd::Ones(1, 1);
  model.sigma = Eigen::VectorXd::Constant(1, 2.0);
  model.X = Eigen::MatrixXd::Constant(1, 1, 2.0);
  model.X_tilde.resize(0, 1);

  // factor form u (sigma + lambda) v = 2.5
  SUBCASE("exactly reproduced entry has w = 0") {
    SparseRatings M(1, 1, {{0, 0, 2.5}});
    const DualVariables w = dual_w(model, M, MaliciousMatrix::empty(1));
    CHECK(w.normal[0] == Approx(0.0));
  }
  SUBCASE("residual of lambda/2 gives w = 0.5") {
    SparseRatings M(1, 1, {{0, 0, 2.75}});
    const DualVariables w = dual_w(model, M, MaliciousMatrix::empty(1));
    CHECK(w.normal[0] == Approx(0.5));
  }
  SUBCASE("lambda must be positive") {
    model.lambda = 0.0;
    SparseRatings M(1, 1, {{0, 0, 2.5}});
    CHECK_THROWS(dual_w(model, M, MaliciousMatrix::empty(1)));
  }
}

TEST_CASE("the assembled subgradient is inside the nuclear-norm ball") {
  SyntheticOptions gen;
  gen.num_users = 8;
  gen.num_items = 6;
  gen.rank = 2;
  gen.obs_fraction = 0.7;
  gen.noise_sd = 0.05;
  gen.seed = 19;
  const SyntheticData data = generate_synthetic(gen);
  MaliciousMatrix mt = sample_support(2, 6, 3, 2.0, 2);
  SvtOptions opts;
  opts.tol = 1e-12;
  const NuclearModel model = svt_fit(data.ratings, mt, 0.4, opts);
  REQUIRE(model.rank() >= 1);

  const int m = 8;
  const int rows = m + 2;
  Eigen::MatrixXd stacked_u(rows, model.rank());
  stacked_u << model.U, model.U_tilde;

  // W = R(D - Z)/lambda - [U;U~]V^T; its on-support entries equal dual_w
  Eigen::MatrixXd W = -stacked_u * model.V.transpose();
  const DualVariables duals = dual_w(model, data.ratings, mt);
  for (const RatingEntry& r : data.ratings.entries())
    W(r.user, r.item) += (r.value - model.X(r.user, r.item)) / model.lambda;
  for (const RatingEntry& r : mt.entries())
    W(m + r.user, r.item) += (r.value - model.X_tilde(r.user, r.item)) / model.lambda;

  std::size_t e = 0;
  for (const RatingEntry& r : data.ratings.entries()) {
    const double via_dual = duals.normal[e++] ;
    const double direct = W(r.user, r.item) ;
    CHECK(via_dual == Approx(direct).epsilon(1e-6));
  }

  CHECK(spectral_norm(W) <= 1.0 + 1e-3);
  // W lives in the orthogonal complement of the solution's row/column spaces
  CHECK((stacked_u.transpose() * W).norm() <= 1e-4 * std::max(1.0, W.norm()));
  CHECK((W * model.V).norm() <= 1e-4 * std::max(1.0, W.norm()));
}

TEST_CASE("svt rejects bad arguments") {
  SparseRatings M(2, 2, {{0, 0, 1.0}});
  CHECK_THROWS(svt_fit(M, MaliciousMatrix::empty(2), 0.0));
  SvtOptions opts;
  opts.step = 1.5;
  CHECK_THROWS(svt_fit(M, MaliciousMatrix::empty(2), 0.1, opts));
  SvtOptions tiny;
  tiny.max_iter = 1;
  tiny.tol = 1e-16;
  CHECK_THROWS(svt_fit(M, MaliciousMatrix::empty(2), 0.1, tiny));
}
