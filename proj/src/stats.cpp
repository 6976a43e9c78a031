#include "cfpoison/stats.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace cfpoison {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the textbook continued fraction for I_x(a,b).
double incomplete_beta_cf(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kTol = 1e-15;
  constexpr int kMaxTerms = 100000;

  auto numer = [x, a, b](int n) {
    if (n % 2 == 0) {
      double m = n / 2;
      return m * (b - m) * x / (a + 2.0 * m - 1.0) / (a + 2.0 * m);
    }
    double m = (n - 1) / 2;
    return -(a + m) * (a + b + m) * x / (a + 2.0 * m) / (a + 2.0 * m + 1.0);
  };

  double ret = 1.0;  // denominators are all 1
  double c = ret;
  double d = 0.0;
  for (int n = 1; n < kMaxTerms; ++n) {
    double num = numer(n);
    d = 1.0 + num * d;
    if (d == 0.0) d = kTiny;
    c = 1.0 + num / c;
    if (c == 0.0) c = kTiny;
    d = 1.0 / d;
    double mult = c * d;
    ret *= mult;
    if (std::fabs(mult - 1.0) <= kTol) break;
  }
  return ret;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0 && a > 0.0 && b > 0.0))
    throw std::invalid_argument("regularized_incomplete_beta: domain error");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double logx = std::log(x);
  double logy = std::log1p(-x);
  if (x <= (a + 1.0) / (a + b + 2.0))
    return std::exp(logx * a + logy * b - log_beta(a, b)) / a / incomplete_beta_cf(x, a, b);
  return 1.0 - std::exp(logy * b + logx * a - log_beta(a, b)) / b / incomplete_beta_cf(1.0 - x, b, a);
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: dof must be positive");
  double tail = regularized_incomplete_beta(dof / (t * t + dof), dof / 2.0, 0.5) / 2.0;
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_two_sided_p(double t, double dof) {
  double p = regularized_incomplete_beta(dof / (t * t + dof), dof / 2.0, 0.5);
  return p > 1.0 ? 1.0 : p;
}

}  // namespace cfpoison
