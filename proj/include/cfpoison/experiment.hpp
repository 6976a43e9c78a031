#ifndef CFPOISON_EXPERIMENT_HPP_
#define CFPOISON_EXPERIMENT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfpoison/attacks.hpp"
#include "cfpoison/data_io.hpp"
#include "cfpoison/ratings.hpp"

namespace cfpoison {

/// Full experiment description. Built from a flat key=value config file plus
/// command-line overrides; see the README for the key schema.
struct ExperimentConfig {
  // data
  std::string data_source = "synthetic";  // synthetic | movielens | csv_raw
  std::string data_path;
  int min_ratings = 20;
  double shift_lo = -2.0;
  double shift_hi = 2.0;
  int max_users = 0;  // 0 = no cap; nuclear movielens runs default to 1000
  int max_items = 0;  // 0 = no cap; nuclear movielens runs default to 1700
  SyntheticOptions synth;

  // solver + implicit gradient
  SolverConfig solver;

  // budget
  std::vector<double> alpha_list{0.03};
  int budget_b = 10;
  double rating_cap = 2.0;

  // utility
  double mu1 = 1.0;
  double mu2 = 0.0;
  int target_item = -1;        // explicit J0 override; -1 selects by level
  double target_level = 0.8;   // pick the item with clean average nearest this
  double target_weight = 2.0;  // w(j0)

  // attacks
  std::vector<std::string> attacks{"pga"};
  std::vector<double> beta_list{0.6};  // sgld only
  PgaConfig pga;
  SgldConfig sgld;

  // evaluation
  double heldout_fraction = 0.0;  // 0 evaluates on the full unobserved complement

  // run control
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  bool save_attacks = false;
};

/// Parse `key = value` lines ('#' comments, blank lines allowed).
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Build a config from key/value pairs; unknown keys raise errors.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);

struct CellResult {
  double alpha = 0.0;
  std::string attack;
  double beta = 0.0;
  double rmse = 0.0;
  double avg_rating = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double utility = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string error;
  MaliciousMatrix mt;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  int target_item = -1;
  SparseRatings ratings;
  Eigen::MatrixXd baseline;
};

/// Run the (alpha x attack x beta) grid: fit the clean baseline once, pick
/// the target item, run each attack cell, refit, and measure. Writes
/// results.csv and manifest.json into output_dir; a failing cell records its
/// error in the row and the sweep continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// The results.csv header and one formatted row (shared by tools).
std::string results_csv_header();
std::string results_csv_row(const CellResult& cell, double mu1, double mu2);

/// Deterministic per-cell seed derivation.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace cfpoison

#endif  // CFPOISON_EXPERIMENT_HPP_
