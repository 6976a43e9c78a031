#ifndef CFPOISON_METRICS_HPP_
#define CFPOISON_METRICS_HPP_

#include <Eigen/Core>

#include "cfpoison/objectives.hpp"
#include "cfpoison/ratings.hpp"

namespace cfpoison {

/// Root mean square deviation between two prediction matrices over the
/// unobserved cells: sqrt(sum_{(i,j) not observed} (a - b)^2 / count).
double rmse_unseen(const Eigen::MatrixXd& Mhat, const Eigen::MatrixXd& Mbar,
                   const ObservedMask& observed);

/// Mean of predicted column j over normal users.
double avg_item_rating(const Eigen::MatrixXd& Mhat, int item);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

/// Paired two-sided t test on per-item rated fractions: pairs
/// f_j = (#raters of j)/m for normal users against the fake-user analogue
/// and tests whether the n differences have zero mean. Zero-variance
/// differences return (0, 1).
TTestResult item_choice_t_test(const SparseRatings& normal, const MaliciousMatrix& malicious);

}  // namespace cfpoison

#endif  // CFPOISON_METRICS_HPP_
