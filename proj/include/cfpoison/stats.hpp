#ifndef CFPOISON_STATS_HPP_
#define CFPOISON_STATS_HPP_

namespace cfpoison {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation, absolute accuracy around 1e-14 for moderate a, b.
double regularized_incomplete_beta(double x, double a, double b);

/// CDF of Student's t distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

/// Two-sided tail probability P(|T| >= |t|) under the t distribution.
double student_t_two_sided_p(double t, double dof);

}  // namespace cfpoison

#endif  // CFPOISON_STATS_HPP_
