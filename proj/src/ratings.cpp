#include "cfpoison/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace cfpoison {

SparseRatings::SparseRatings(int num_users, int num_items, std::vector<RatingEntry> entries)
    : num_users_(num_users), num_items_(num_items), entries_(std::move(entries)) {
  if (num_users_ < 0 || num_items_ < 0)
    throw std::invalid_argument("SparseRatings: negative dimensions");
  std::sort(entries_.begin(), entries_.end(), [](const RatingEntry& a, const RatingEntry& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  rows_.assign(num_users_, {});
  cols_.assign(num_items_, {});
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const RatingEntry& r = entries_[e];
    if (r.user < 0 || r.user >= num_users_ || r.item < 0 || r.item >= num_items_)
      throw std::invalid_argument("SparseRatings: entry (" + std::to_string(r.user) + "," +
                                  std::to_string(r.item) + ") out of range");
    if (!std::isfinite(r.value))
      throw std::invalid_argument("SparseRatings: non-finite rating at (" +
                                  std::to_string(r.user) + "," + std::to_string(r.item) + ")");
    if (e > 0 && entries_[e - 1].user == r.user && entries_[e - 1].item == r.item)
      throw std::invalid_argument("SparseRatings: duplicate entry (" + std::to_string(r.user) +
                                  "," + std::to_string(r.item) + ")");
    rows_[r.user].push_back({r.item, r.value});
    cols_[r.item].push_back({r.user, r.value});
  }
}

Eigen::MatrixXd SparseRatings::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_users_, num_items_);
  for (const RatingEntry& r : entries_) out(r.user, r.item) = r.value;
  return out;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> SparseRatings::observed_mask() const {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(num_users_, num_items_);
  mask.setConstant(false);
  for (const RatingEntry& r : entries_) mask(r.user, r.item) = true;
  return mask;
}

bool SparseRatings::operator==(const SparseRatings& other) const {
  if (num_users_ != other.num_users_ || num_items_ != other.num_items_) return false;
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    if (entries_[e].user != other.entries_[e].user || entries_[e].item != other.entries_[e].item ||
        entries_[e].value != other.entries_[e].value)
      return false;
  }
  return true;
}

AttackBudget::AttackBudget(double alpha_, int max_items_, double rating_cap_)
    : alpha(alpha_), max_items(max_items_), rating_cap(rating_cap_) {
  if (alpha <= 0.0) throw std::invalid_argument("AttackBudget: alpha must be positive");
  if (max_items < 1) throw std::invalid_argument("AttackBudget: max_items must be at least 1");
  if (rating_cap <= 0.0) throw std::invalid_argument("AttackBudget: rating_cap must be positive");
}

int AttackBudget::num_malicious(int num_users) const {
  return std::max(1, static_cast<int>(std::floor(alpha * num_users)));
}

MaliciousMatrix MaliciousMatrix::from_dense(const Eigen::MatrixXd& values) {
  std::vector<RatingEntry> entries;
  entries.reserve(static_cast<std::size_t>(values.size()));
  for (int i = 0; i < values.rows(); ++i)
    for (int j = 0; j < values.cols(); ++j) entries.push_back({i, j, values(i, j)});
  return MaliciousMatrix(static_cast<int>(values.rows()), static_cast<int>(values.cols()),
                         std::move(entries));
}

MaliciousMatrix MaliciousMatrix::with_values(const std::vector<double>& values) const {
  if (values.size() != data_.entries().size())
    throw std::invalid_argument("with_values: size mismatch");
  std::vector<RatingEntry> entries = data_.entries();
  for (std::size_t e = 0; e < entries.size(); ++e) entries[e].value = values[e];
  return MaliciousMatrix(num_malicious(), num_items(), std::move(entries));
}

bool check_feasible(const MaliciousMatrix& mm, const AttackBudget& budget) {
  for (int i = 0; i < mm.num_malicious(); ++i)
    if (static_cast<int>(mm.row(i).size()) > budget.max_items) return false;
  for (const RatingEntry& r : mm.entries())
    if (std::abs(r.value) > budget.rating_cap) return false;
  return true;
}

MaliciousMatrix truncate_ratings(const MaliciousMatrix& mm, double cap) {
  if (cap <= 0.0) throw std::invalid_argument("truncate_ratings: cap must be positive");
  std::vector<RatingEntry> entries = mm.entries();
  for (RatingEntry& r : entries) r.value = std::clamp(r.value, -cap, cap);
  return MaliciousMatrix(mm.num_malicious(), mm.num_items(), std::move(entries));
}

MaliciousMatrix select_top_b(const MaliciousMatrix& mm, int max_items) {
  if (max_items < 1) throw std::invalid_argument("select_top_b: max_items must be at least 1");
  std::vector<RatingEntry> kept;
  for (int i = 0; i < mm.num_malicious(); ++i) {
    std::vector<IndexedValue> row = mm.row(i);
    // stable on the item-sorted row list, so equal magnitudes keep the
    // lower item index
    std::stable_sort(row.begin(), row.end(), [](const IndexedValue& a, const IndexedValue& b) {
      return std::abs(a.value) > std::abs(b.value);
    });
    const int keep = std::min<int>(max_items, static_cast<int>(row.size()));
    for (int e = 0; e < keep; ++e) kept.push_back({i, row[e].index, row[e].value});
  }
  return MaliciousMatrix(mm.num_malicious(), mm.num_items(), std::move(kept));
}

MaliciousMatrix sample_support(int num_malicious, int num_items, int max_items,
                               double rating_cap, std::uint64_t seed) {
  if (max_items > num_items)
    throw std::invalid_argument("sample_support: per-user budget exceeds item count");
  if (max_items < 1) throw std::invalid_argument("sample_support: max_items must be at least 1");
  if (rating_cap <= 0.0) throw std::invalid_argument("sample_support: rating_cap must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value_dist(-rating_cap, rating_cap);
  std::vector<RatingEntry> entries;
  entries.reserve(static_cast<std::size_t>(num_malicious) * max_items);
  std::vector<int> pool(num_items);
  for (int i = 0; i < num_malicious; ++i) {
    // partial Fisher-Yates: first max_items slots are a uniform sample
    // without replacement
    for (int j = 0; j < num_items; ++j) pool[j] = j;
    for (int s = 0; s < max_items; ++s) {
      std::uniform_int_distribution<int> pick(s, num_items - 1);
      std::swap(pool[s], pool[pick(rng)]);
    }
    std::sort(pool.begin(), pool.begin() + max_items);
    for (int s = 0; s < max_items; ++s) entries.push_back({i, pool[s], value_dist(rng)});
  }
  return MaliciousMatrix(num_malicious, num_items, std::move(entries));
}

}  // namespace cfpoison
