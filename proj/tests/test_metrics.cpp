#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cfpoison/metrics.hpp"
#include "cfpoison/stats.hpp"
#include "test_util.hpp"

using namespace cfpoison;
using doctest::Approx;

TEST_CASE("t cdf matches reference values to 1e-8") {
  // references from an independent implementation of the t distribution
  struct Ref {
    double x;
    double dof;
    double cdf;
  };
  const Ref refs[] = {
      {0.0, 1, 0.5},
      {0.5, 1, 0.6475836176504333},
      {-0.5, 1, 0.3524163823495668},
      {2.0, 2, 0.908248290463863},
      {-2.0, 2, 0.09175170953613696},
      {4.242640687119285, 4, 0.9933822002181586},
      {10.0, 5, 0.9999145262121285},
      {-2.0, 30, 0.02731252248149155},
      {2.0, 99, 0.9758801533136835},
      {10.0, 30, 0.9999999999771237},
  };
  for (const Ref& r : refs) CHECK(student_t_cdf(r.x, r.dof) == Approx(r.cdf).epsilon(1e-8));
}

TEST_CASE("two-sided p is the symmetric tail mass") {
  CHECK(student_t_two_sided_p(0.0, 5) == Approx(1.0));
  CHECK(student_t_two_sided_p(2.0, 30) == Approx(2.0 * (1.0 - 0.9726874775185085)).epsilon(1e-8));
  CHECK(student_t_two_sided_p(-2.0, 30) == Approx(student_t_two_sided_p(2.0, 30)).epsilon(1e-12));
}

TEST_CASE("rmse_unseen basics") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b = a;
  ObservedMask observed(2, 2);
  observed.setConstant(false);

  CHECK(rmse_unseen(a, b, observed) == 0.0);

  SUBCASE("two unseen entries with unit differences") {
    b(0, 0) += 1.0;
    b(1, 1) -= 1.0;
    observed(0, 1) = true;
    observed(1, 0) = true;
    CHECK(rmse_unseen(a, b, observed) == Approx(1.0));
  }
  SUBCASE("single unseen entry") {
    observed.setConstant(true);
    observed(1, 0) = false;
    b(1, 0) += 3.0;
    CHECK(rmse_unseen(a, b, observed) == Approx(3.0));
  }
  SUBCASE("empty complement is an error") {
    observed.setConstant(true);
    CHECK_THROWS(rmse_unseen(a, b, observed));
  }
  SUBCASE("symmetric in the two matrices") {
    b(0, 0) += 0.7;
    b(1, 1) -= 0.2;
    CHECK(rmse_unseen(a, b, observed) == Approx(rmse_unseen(b, a, observed)));
  }
}

TEST_CASE("avg_item_rating is the column mean") {
  Eigen::MatrixXd m(3, 2);
  m << 0.8, 2, 0.8, -2, 0.8, 0;
  CHECK(avg_item_rating(m, 0) == Approx(0.8));
  CHECK(avg_item_rating(m, 1) == Approx(0.0));
  Eigen::MatrixXd m2(3, 1);
  m2 << 1, 0, 2;
  CHECK(avg_item_rating(m2, 0) == Approx(1.0));
}

TEST_CASE("identical rated-item profiles are not flagged") {
  // fake-user fractions exactly equal to normal fractions -> zero
  // differences, degenerate variance, p = 1
  SparseRatings normal(4, 3,
                       {{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}, {0, 1, 1.0},
                        {1, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  // both profiles have per-item fractions {1.0, 0.5, 0.5}
  MaliciousMatrix mal(2, 3, {{0, 0, 2.0}, {1, 0, 2.0}, {0, 1, 2.0}, {0, 2, 2.0}});
  const TTestResult res = item_choice_t_test(normal, mal);
  CHECK(res.t == 0.0);
  CHECK(res.p == 1.0);
}

TEST_CASE("t statistic and p value match the frozen example") {
  // differences per item: 0.1, 0.2, 0.3, 0.4, 0.5 -> t = 4.2426, p = 0.013236
  // normal fractions (m=10): 0.1 .. 0.5, malicious fractions (m'=5): 0.2 .. 1.0
  std::vector<RatingEntry> ne;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i <= j; ++i) ne.push_back({i, j, 1.0});
  SparseRatings normal(10, 5, ne);
  std::vector<RatingEntry> me;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < (j + 1); ++i) me.push_back({i, j, 2.0});
  MaliciousMatrix mal(5, 5, me);

  const TTestResult res = item_choice_t_test(normal, mal);
  CHECK(res.t == Approx(4.242640687119285).epsilon(1e-9));
  CHECK(res.p == Approx(0.013235599563682695).epsilon(1e-6));
}

TEST_CASE("uniform support against skewed popularity is detected") {
  // power-law normal popularity on n=100 items vs uniform malicious support
  const int n = 100;
  const int m = 200;
  std::mt19937_64 rng(123);
  std::vector<RatingEntry> ne;
  for (int j = 0; j < n; ++j) {
    const double frac = 0.9 * std::pow(j + 1.0, -1.0);
    const int raters = std::max(1, static_cast<int>(frac * m));
    for (int i = 0; i < raters; ++i) ne.push_back({i, j, 1.0});
  }
  SparseRatings normal(m, n, ne);

  const MaliciousMatrix mal = sample_support(6, n, 10, 2.0, rng());
  const TTestResult res = item_choice_t_test(normal, mal);
  CHECK(res.p < 0.05);
}

TEST_CASE("p values always land in the unit interval") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MaliciousMatrix mal = sample_support(3, 30, 5, 2.0, rng());
    std::vector<RatingEntry> ne;
    std::uniform_int_distribution<int> user(0, 19);
    for (int j = 0; j < 30; ++j) ne.push_back({user(rng), j, 1.0});
    SparseRatings normal(20, 30, ne);
    const TTestResult res = item_choice_t_test(normal, mal);
    CHECK(res.p >= 0.0);
    CHECK(res.p <= 1.0);
  }
}
