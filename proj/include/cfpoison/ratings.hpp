#ifndef CFPOISON_RATINGS_HPP_
#define CFPOISON_RATINGS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace cfpoison {

struct RatingEntry {
  int user = 0;
  int item = 0;
  double value = 0.0;
};

struct IndexedValue {
  int index = 0;   // item id in a row list, user id in a column list
  double value = 0.0;
};

/// Partially observed user-by-item rating matrix.
///
/// Entries are canonicalized at construction: sorted by (user, item),
/// duplicates rejected, per-row and per-column index lists kept in sorted
/// order. All downstream reductions iterate canonical order, so results do
/// not depend on the order of the input triplets.
class SparseRatings {
 public:
  SparseRatings() = default;
  SparseRatings(int num_users, int num_items, std::vector<RatingEntry> entries);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }
  std::int64_t num_entries() const { return static_cast<std::int64_t>(entries_.size()); }

  const std::vector<RatingEntry>& entries() const { return entries_; }
  const std::vector<IndexedValue>& row(int user) const { return rows_[user]; }
  const std::vector<IndexedValue>& col(int item) const { return cols_[item]; }

  /// Dense m x n matrix with zeros at unobserved cells.
  Eigen::MatrixXd to_dense() const;
  /// Boolean observation mask (true where observed).
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed_mask() const;

  bool operator==(const SparseRatings& other) const;

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  std::vector<RatingEntry> entries_;
  std::vector<std::vector<IndexedValue>> rows_;
  std::vector<std::vector<IndexedValue>> cols_;
};

/// Attack resource bounds: fraction of fake users, per-user item budget,
/// and maximum rating magnitude.
struct AttackBudget {
  double alpha = 0.0;   // malicious user fraction of m
  int max_items = 0;    // B, rated items allowed per fake user
  double rating_cap = 0.0;  // magnitude bound on fake ratings

  AttackBudget(double alpha_, int max_items_, double rating_cap_);

  /// Number of fake users for a system of `num_users` normal users:
  /// floor(alpha * m), never less than one.
  int num_malicious(int num_users) const;
};

/// The attacker's block of fake-user ratings. Same sparse layout as
/// SparseRatings; rows are fake users, columns the shared item set.
class MaliciousMatrix {
 public:
  MaliciousMatrix() = default;
  MaliciousMatrix(int num_malicious, int num_items, std::vector<RatingEntry> entries)
      : data_(num_malicious, num_items, std::move(entries)) {}

  /// A block with zero fake users (the unpoisoned case).
  static MaliciousMatrix empty(int num_items) { return MaliciousMatrix(0, num_items, {}); }
  /// Every cell of `values` becomes a rated entry (dense support).
  static MaliciousMatrix from_dense(const Eigen::MatrixXd& values);

  int num_malicious() const { return data_.num_users(); }
  int num_items() const { return data_.num_items(); }
  std::int64_t num_entries() const { return data_.num_entries(); }
  const std::vector<RatingEntry>& entries() const { return data_.entries(); }
  const std::vector<IndexedValue>& row(int user) const { return data_.row(user); }
  const std::vector<IndexedValue>& col(int item) const { return data_.col(item); }
  Eigen::MatrixXd to_dense() const { return data_.to_dense(); }

  /// New matrix with the same support and entry order but new values.
  MaliciousMatrix with_values(const std::vector<double>& values) const;

  bool operator==(const MaliciousMatrix& other) const { return data_ == other.data_; }

 private:
  SparseRatings data_;
};

/// True iff every fake user rates at most `budget.max_items` items and every
/// rating magnitude is within `budget.rating_cap`.
bool check_feasible(const MaliciousMatrix& mm, const AttackBudget& budget);

/// Clamp all ratings to [-cap, cap]; support unchanged.
MaliciousMatrix truncate_ratings(const MaliciousMatrix& mm, double cap);

/// Keep the min(B, row size) entries of largest magnitude in each row.
/// Ties broken toward the lower item index.
MaliciousMatrix select_top_b(const MaliciousMatrix& mm, int max_items);

/// Random feasible block: each fake user rates exactly `max_items` distinct
/// items chosen uniformly, with values uniform in [-rating_cap, rating_cap].
MaliciousMatrix sample_support(int num_malicious, int num_items, int max_items,
                               double rating_cap, std::uint64_t seed);

}  // namespace cfpoison

#endif  // CFPOISON_RATINGS_HPP_
