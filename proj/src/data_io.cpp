#include "cfpoison/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cfpoison {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

long parse_long(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

void write_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

}  // namespace

SparseRatings load_movielens(const std::string& path, const MovieLensOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_movielens: cannot open " + path);

  struct RawRating {
    long user;
    long item;
    double value;
  };
  std::vector<RawRating> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < 3)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected at least 3 fields");
    raw.push_back({parse_long(fields[0], line_no, "user id"),
                   parse_long(fields[1], line_no, "item id"),
                   parse_double(fields[2], line_no, "rating")});
  }

  std::map<long, int> user_counts;
  for (const RawRating& r : raw) ++user_counts[r.user];

  std::map<long, int> user_index;
  for (const auto& [id, count] : user_counts)
    if (count >= opts.min_ratings) user_index.emplace(id, static_cast<int>(user_index.size()));
  if (user_index.empty())
    throw std::runtime_error("load_movielens: no users left after min-ratings filter");

  std::map<long, int> item_index;
  for (const RawRating& r : raw)
    if (user_index.count(r.user)) item_index.emplace(r.item, 0);
  int next_item = 0;
  for (auto& [id, idx] : item_index) idx = next_item++;

  const double scale = (opts.shift_hi - opts.shift_lo) / (opts.native_hi - opts.native_lo);
  std::vector<RatingEntry> entries;
  entries.reserve(raw.size());
  for (const RawRating& r : raw) {
    auto it = user_index.find(r.user);
    if (it == user_index.end()) continue;
    entries.push_back({it->second, item_index.at(r.item),
                       opts.shift_lo + (r.value - opts.native_lo) * scale});
  }

  if (!opts.sidecar_path.empty()) {
    std::ofstream side(opts.sidecar_path);
    if (!side) throw std::runtime_error("load_movielens: cannot write " + opts.sidecar_path);
    side << "kind,original_id,index\n";
    for (const auto& [id, idx] : user_index) side << "user," << id << "," << idx << "\n";
    for (const auto& [id, idx] : item_index) side << "item," << id << "," << idx << "\n";
  }

  return SparseRatings(static_cast<int>(user_index.size()), next_item, std::move(entries));
}

SparseRatings load_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_raw_csv: cannot open " + path);
  std::vector<RatingEntry> entries;
  int num_users = 0;
  int num_items = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < 3)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 3 fields");
    const int user = static_cast<int>(parse_long(fields[0], line_no, "user id"));
    const int item = static_cast<int>(parse_long(fields[1], line_no, "item id"));
    entries.push_back({user, item, parse_double(fields[2], line_no, "rating")});
    num_users = std::max(num_users, user + 1);
    num_items = std::max(num_items, item + 1);
  }
  return SparseRatings(num_users, num_items, std::move(entries));
}

void save_raw_csv(const SparseRatings& ratings, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_raw_csv: cannot write " + path);
  out << "user,item,rating\n";
  for (const RatingEntry& r : ratings.entries()) {
    out << r.user << "," << r.item << ",";
    write_value(out, r.value);
    out << "\n";
  }
}

void save_malicious_csv(const MaliciousMatrix& mt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_malicious_csv: cannot write " + path);
  out << "user,item,rating\n";
  for (const RatingEntry& r : mt.entries()) {
    out << r.user << "," << r.item << ",";
    write_value(out, r.value);
    out << "\n";
  }
}

MaliciousMatrix load_malicious_csv(const std::string& path) {
  const SparseRatings data = load_raw_csv(path);
  return MaliciousMatrix(data.num_users(), data.num_items(), data.entries());
}

SyntheticData generate_synthetic(const SyntheticOptions& opts) {
  if (opts.rank < 1 || opts.rank > std::min(opts.num_users, opts.num_items))
    throw std::invalid_argument("generate_synthetic: bad rank");
  if (opts.obs_fraction <= 0.0 || opts.obs_fraction > 1.0)
    throw std::invalid_argument("generate_synthetic: obs_fraction out of (0,1]");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd A(opts.num_users, opts.rank);
  Eigen::MatrixXd B(opts.num_items, opts.rank);
  for (int i = 0; i < A.rows(); ++i)
    for (int t = 0; t < A.cols(); ++t) A(i, t) = gauss(rng);
  for (int j = 0; j < B.rows(); ++j)
    for (int t = 0; t < B.cols(); ++t) B(j, t) = gauss(rng);
  Eigen::MatrixXd truth = A * B.transpose();
  const double peak = truth.cwiseAbs().maxCoeff();
  if (peak > 0.0) truth *= 2.0 / peak;

  const int per_user = std::max(1, static_cast<int>(std::lround(opts.obs_fraction * opts.num_items)));

  std::vector<double> weights(opts.num_items, 1.0);
  if (opts.popularity_gamma > 0.0)
    for (int j = 0; j < opts.num_items; ++j)
      weights[j] = std::pow(static_cast<double>(j + 1), -opts.popularity_gamma);

  std::vector<RatingEntry> entries;
  entries.reserve(static_cast<std::size_t>(opts.num_users) * per_user);
  std::vector<double> pool_weights;
  std::vector<int> pool_items;
  for (int i = 0; i < opts.num_users; ++i) {
    // weighted sampling without replacement per user
    pool_weights = weights;
    pool_items.resize(opts.num_items);
    for (int j = 0; j < opts.num_items; ++j) pool_items[j] = j;
    int pool_size = opts.num_items;
    std::vector<int> chosen;
    chosen.reserve(per_user);
    for (int s = 0; s < per_user; ++s) {
      double total = 0.0;
      for (int p = 0; p < pool_size; ++p) total += pool_weights[p];
      std::uniform_real_distribution<double> pick(0.0, total);
      double target = pick(rng);
      int sel = pool_size - 1;
      double acc = 0.0;
      for (int p = 0; p < pool_size; ++p) {
        acc += pool_weights[p];
        if (target <= acc) {
          sel = p;
          break;
        }
      }
      chosen.push_back(pool_items[sel]);
      std::swap(pool_items[sel], pool_items[pool_size - 1]);
      std::swap(pool_weights[sel], pool_weights[pool_size - 1]);
      --pool_size;
    }
    std::sort(chosen.begin(), chosen.end());
    for (int j : chosen) {
      double value = truth(i, j);
      if (opts.noise_sd > 0.0) value += opts.noise_sd * gauss(rng);
      entries.push_back({i, j, value});
    }
  }

  SyntheticData out;
  out.ratings = SparseRatings(opts.num_users, opts.num_items, std::move(entries));
  out.ground_truth = std::move(truth);
  return out;
}

}  // namespace cfpoison
