#ifndef CFPOISON_DATA_IO_HPP_
#define CFPOISON_DATA_IO_HPP_

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "cfpoison/ratings.hpp"

namespace cfpoison {

struct MovieLensOptions {
  int min_ratings = 20;      // users below this are dropped
  double shift_lo = -2.0;    // target rating interval
  double shift_hi = 2.0;
  double native_lo = 0.5;    // native MovieLens rating range
  double native_hi = 5.0;
  std::string sidecar_path;  // id-mapping file; empty skips writing
};

/// Load a MovieLens-format CSV (header userId,movieId,rating,timestamp).
/// Users with fewer than min_ratings ratings are dropped, ids densified to
/// contiguous indices in ascending original-id order, and ratings mapped
/// affinely from the native range onto [shift_lo, shift_hi]. Malformed rows
/// raise errors carrying the line number.
SparseRatings load_movielens(const std::string& path, const MovieLensOptions& opts = {});

/// Load a raw triplet CSV (header user,item,rating) whose values are already
/// in the working range; indices must be dense 0-based.
SparseRatings load_raw_csv(const std::string& path);

/// Write matching raw triplet CSV.
void save_raw_csv(const SparseRatings& ratings, const std::string& path);
void save_malicious_csv(const MaliciousMatrix& mt, const std::string& path);
MaliciousMatrix load_malicious_csv(const std::string& path);

struct SyntheticOptions {
  int num_users = 100;
  int num_items = 50;
  int rank = 2;
  double obs_fraction = 0.5;   // per-user fraction of items rated
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  double popularity_gamma = 0.0;  // 0 = uniform item choice, >0 power-law weights
};

struct SyntheticData {
  SparseRatings ratings;
  Eigen::MatrixXd ground_truth;  // m x n
};

/// Low-rank ground truth A B^T from seeded Gaussian factors, rescaled so
/// entries span [-2, 2]. Every user rates round(obs_fraction * n) distinct
/// items; with popularity_gamma > 0 item j is chosen with weight
/// (j+1)^(-gamma), producing a skewed popularity profile. Gaussian noise is
/// added to observed entries.
SyntheticData generate_synthetic(const SyntheticOptions& opts);

}  // namespace cfpoison

#endif  // CFPOISON_DATA_IO_HPP_
