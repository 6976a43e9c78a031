#include "cfpoison/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "cfpoison/stats.hpp"

namespace cfpoison {

double rmse_unseen(const Eigen::MatrixXd& Mhat, const Eigen::MatrixXd& Mbar,
                   const ObservedMask& observed) {
  if (Mhat.rows() != Mbar.rows() || Mhat.cols() != Mbar.cols() ||
      Mhat.rows() != observed.rows() || Mhat.cols() != observed.cols())
    throw std::invalid_argument("rmse_unseen: shape mismatch");
  double sum = 0.0;
  std::int64_t count = 0;
  for (int j = 0; j < Mhat.cols(); ++j)
    for (int i = 0; i < Mhat.rows(); ++i)
      if (!observed(i, j)) {
        const double d = Mhat(i, j) - Mbar(i, j);
        sum += d * d;
        ++count;
      }
  if (count == 0) throw std::invalid_argument("rmse_unseen: no unobserved cells");
  return std::sqrt(sum / static_cast<double>(count));
}

double avg_item_rating(const Eigen::MatrixXd& Mhat, int item) {
  if (item < 0 || item >= Mhat.cols()) throw std::invalid_argument("avg_item_rating: bad item");
  return Mhat.col(item).mean();
}

TTestResult item_choice_t_test(const SparseRatings& normal, const MaliciousMatrix& malicious) {
  const int n = normal.num_items();
  if (n < 2) throw std::invalid_argument("item_choice_t_test: need at least two items");
  if (malicious.num_items() != n)
    throw std::invalid_argument("item_choice_t_test: item count mismatch");
  const double m = normal.num_users();
  const double mp = malicious.num_malicious();
  if (m < 1 || mp < 1) throw std::invalid_argument("item_choice_t_test: empty user population");

  Eigen::VectorXd diff(n);
  for (int j = 0; j < n; ++j)
    diff(j) = static_cast<double>(malicious.col(j).size()) / mp -
              static_cast<double>(normal.col(j).size()) / m;

  const double mean = diff.mean();
  const double var = (diff.array() - mean).square().sum() / (n - 1);
  if (var <= 0.0) return {0.0, 1.0};
  const double t = mean / std::sqrt(var / n);
  return {t, student_t_two_sided_p(t, n - 1)};
}

}  // namespace cfpoison
