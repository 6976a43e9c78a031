#include "cfpoison/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cfpoison/metrics.hpp"
#include "cfpoison/version.hpp"

namespace cfpoison {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return kv_.count(key) > 0;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad number for " + key + ": '" + it->second + "'");
    }
  }
  int integer(const std::string& key, int fallback) {
    return static_cast<int>(num(key, fallback));
  }
  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config: bad boolean for " + key + ": '" + it->second + "'");
  }
  std::vector<double> num_list(const std::string& key, std::vector<double> fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    for (const std::string& part : split_list(it->second)) {
      try {
        out.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw std::runtime_error("config: bad number in " + key + ": '" + part + "'");
      }
    }
    if (out.empty()) throw std::runtime_error("config: empty list for " + key);
    return out;
  }
  std::vector<std::string> str_list(const std::string& key, std::vector<std::string> fallback) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    auto out = split_list(it->second);
    if (out.empty()) throw std::runtime_error("config: empty list for " + key);
    return out;
  }

  void check_all_used() const {
    std::string unknown;
    for (const auto& [key, value] : kv_)
      if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw std::runtime_error("config: unknown keys: " + unknown);
  }

 private:
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> used_;
};

StepSchedule::Kind schedule_kind(const std::string& name, const std::string& key) {
  if (name == "constant") return StepSchedule::Kind::Constant;
  if (name == "inv_sqrt") return StepSchedule::Kind::InvSqrt;
  throw std::runtime_error("config: bad schedule for " + key + ": '" + name + "'");
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
  ConfigReader r(kv);
  ExperimentConfig cfg;

  cfg.data_source = r.str("data.source", cfg.data_source);
  cfg.data_path = r.str("data.path", cfg.data_path);
  cfg.min_ratings = r.integer("data.min_ratings", cfg.min_ratings);
  cfg.shift_lo = r.num("data.shift_lo", cfg.shift_lo);
  cfg.shift_hi = r.num("data.shift_hi", cfg.shift_hi);
  cfg.max_users = r.integer("data.max_users", cfg.max_users);
  cfg.max_items = r.integer("data.max_items", cfg.max_items);

  cfg.synth.num_users = r.integer("synth.users", cfg.synth.num_users);
  cfg.synth.num_items = r.integer("synth.items", cfg.synth.num_items);
  cfg.synth.rank = r.integer("synth.rank", cfg.synth.rank);
  cfg.synth.obs_fraction = r.num("synth.obs_fraction", cfg.synth.obs_fraction);
  cfg.synth.noise_sd = r.num("synth.noise_sd", cfg.synth.noise_sd);
  cfg.synth.popularity_gamma = r.num("synth.popularity_gamma", cfg.synth.popularity_gamma);

  const std::string solver_kind = r.str("solver.kind", "als");
  if (solver_kind == "als")
    cfg.solver.kind = SolverConfig::Kind::Als;
  else if (solver_kind == "nuclear")
    cfg.solver.kind = SolverConfig::Kind::Nuclear;
  else
    throw std::runtime_error("config: bad solver.kind: '" + solver_kind + "'");
  cfg.solver.rank = r.integer("solver.rank", cfg.solver.rank);
  cfg.solver.lambda_u = r.num("solver.lambda_u", cfg.solver.lambda_u);
  cfg.solver.lambda_v = r.num("solver.lambda_v", cfg.solver.lambda_v);
  cfg.solver.tol = r.num("solver.tol", cfg.solver.tol);
  cfg.solver.max_sweeps = r.integer("solver.max_sweeps", cfg.solver.max_sweeps);
  cfg.solver.lambda = r.num("solver.lambda", cfg.solver.lambda);
  cfg.solver.svt_step = r.num("solver.svt_step", cfg.solver.svt_step);
  cfg.solver.svt_max_iter = r.integer("solver.svt_max_iter", cfg.solver.svt_max_iter);
  cfg.solver.smoothing.tau = r.num("solver.tau", cfg.solver.smoothing.tau);
  cfg.solver.sigma_path = r.flag("solver.sigma_path", cfg.solver.sigma_path);

  cfg.alpha_list = r.num_list("budget.alpha", cfg.alpha_list);
  cfg.budget_b = r.integer("budget.b", cfg.budget_b);
  cfg.rating_cap = r.num("budget.cap", cfg.rating_cap);

  cfg.mu1 = r.num("utility.mu1", cfg.mu1);
  cfg.mu2 = r.num("utility.mu2", cfg.mu2);
  cfg.target_item = r.integer("utility.target_item", cfg.target_item);
  cfg.target_level = r.num("utility.target_level", cfg.target_level);
  cfg.target_weight = r.num("utility.target_weight", cfg.target_weight);

  cfg.attacks = r.str_list("attack.kinds", cfg.attacks);
  for (const std::string& a : cfg.attacks)
    if (a != "pga" && a != "sgld" && a != "uniform")
      throw std::runtime_error("config: unknown attack kind '" + a + "'");
  cfg.beta_list = r.num_list("attack.beta", cfg.beta_list);
  cfg.pga.max_iter = r.integer("attack.pga_max_iter", cfg.pga.max_iter);
  cfg.pga.step.s0 = r.num("attack.pga_step0", cfg.pga.step.s0);
  cfg.pga.step.kind = schedule_kind(r.str("attack.pga_step_kind", "inv_sqrt"), "attack.pga_step_kind");
  cfg.pga.conv_tol = r.num("attack.pga_conv_tol", cfg.pga.conv_tol);
  cfg.sgld.iterations = r.integer("attack.sgld_iters", cfg.sgld.iterations);
  cfg.sgld.step.s0 = r.num("attack.sgld_step0", cfg.sgld.step.s0);
  cfg.sgld.step.kind =
      schedule_kind(r.str("attack.sgld_step_kind", "inv_sqrt"), "attack.sgld_step_kind");
  cfg.sgld.noise = r.flag("attack.sgld_noise", cfg.sgld.noise);
  cfg.sgld.prior_divide_by_observed =
      r.flag("attack.prior_divide_by_observed", cfg.sgld.prior_divide_by_observed);

  cfg.heldout_fraction = r.num("eval.heldout_fraction", cfg.heldout_fraction);

  cfg.output_dir = r.str("output.dir", cfg.output_dir);
  cfg.save_attacks = r.flag("output.save_attacks", cfg.save_attacks);
  cfg.seed = static_cast<std::uint64_t>(r.num("seed", static_cast<double>(cfg.seed)));
  cfg.threads = r.integer("threads", cfg.threads);

  r.check_all_used();
  return cfg;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 over the combined word
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string results_csv_header() {
  return "alpha,attack,beta,mu1,mu2,rmse,avg_rating_j0,t_stat,p_value,utility,wall_time_s,seed,"
         "error";
}

std::string results_csv_row(const CellResult& cell, double mu1, double mu2) {
  std::stringstream row;
  row << format_double(cell.alpha) << "," << cell.attack << "," << format_double(cell.beta) << ","
      << format_double(mu1) << "," << format_double(mu2) << "," << format_double(cell.rmse) << ","
      << format_double(cell.avg_rating) << "," << format_double(cell.t_stat) << ","
      << format_double(cell.p_value) << "," << format_double(cell.utility) << ","
      << format_double(cell.wall_time_s) << "," << cell.seed << "," << cell.error;
  return row.str();
}

namespace {

SparseRatings subset_ratings(const SparseRatings& full, int max_users, int max_items) {
  if ((max_users <= 0 || full.num_users() <= max_users) &&
      (max_items <= 0 || full.num_items() <= max_items))
    return full;
  const int m = max_users > 0 ? std::min(full.num_users(), max_users) : full.num_users();
  const int n = max_items > 0 ? std::min(full.num_items(), max_items) : full.num_items();
  std::vector<RatingEntry> kept;
  for (const RatingEntry& r : full.entries())
    if (r.user < m && r.item < n) kept.push_back(r);
  return SparseRatings(m, n, std::move(kept));
}

SparseRatings load_data(const ExperimentConfig& cfg) {
  if (cfg.data_source == "synthetic") {
    SyntheticOptions synth = cfg.synth;
    synth.seed = mix_seed(cfg.seed, 0xDA7A);
    return generate_synthetic(synth).ratings;
  }
  if (cfg.data_source == "movielens") {
    MovieLensOptions opts;
    opts.min_ratings = cfg.min_ratings;
    opts.shift_lo = cfg.shift_lo;
    opts.shift_hi = cfg.shift_hi;
    opts.sidecar_path = (std::filesystem::path(cfg.output_dir) / "id_map.csv").string();
    SparseRatings ratings = load_movielens(cfg.data_path, opts);
    int max_users = cfg.max_users;
    int max_items = cfg.max_items;
    if (cfg.solver.kind == SolverConfig::Kind::Nuclear) {
      // nuclear runs on large data default to a subset
      if (max_users == 0) max_users = 1000;
      if (max_items == 0) max_items = 1700;
    }
    return subset_ratings(ratings, max_users, max_items);
  }
  if (cfg.data_source == "csv_raw") return load_raw_csv(cfg.data_path);
  throw std::runtime_error("config: unknown data.source '" + cfg.data_source + "'");
}

ObservedMask evaluation_mask(const ExperimentConfig& cfg, const SparseRatings& ratings) {
  ObservedMask observed = ratings.observed_mask();
  if (cfg.heldout_fraction <= 0.0) return observed;
  // held-out mode evaluates on a random subset of the unobserved cells:
  // everything outside the subset is flagged as if observed
  std::vector<std::pair<int, int>> unseen;
  for (int j = 0; j < observed.cols(); ++j)
    for (int i = 0; i < observed.rows(); ++i)
      if (!observed(i, j)) unseen.push_back({i, j});
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x4EAD));
  std::shuffle(unseen.begin(), unseen.end(), rng);
  const std::size_t keep =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.heldout_fraction * unseen.size()));
  ObservedMask mask(observed.rows(), observed.cols());
  mask.setConstant(true);
  for (std::size_t e = 0; e < keep && e < unseen.size(); ++e)
    mask(unseen[e].first, unseen[e].second) = false;
  return mask;
}

int select_target_item(const ExperimentConfig& cfg, const Eigen::MatrixXd& baseline) {
  if (cfg.target_item >= 0) {
    if (cfg.target_item >= baseline.cols())
      throw std::runtime_error("config: utility.target_item out of range");
    return cfg.target_item;
  }
  int best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < baseline.cols(); ++j) {
    const double gap = std::abs(baseline.col(j).mean() - cfg.target_level);
    if (gap < best_gap) {
      best_gap = gap;
      best = j;
    }
  }
  return best;
}

struct Cell {
  double alpha;
  std::string attack;
  double beta;
  std::uint64_t seed;
};

CellResult run_cell(const ExperimentConfig& cfg, const Cell& cell, const SparseRatings& ratings,
                    const UtilityConfig& util, int target) {
  CellResult res;
  res.alpha = cell.alpha;
  res.attack = cell.attack;
  res.beta = cell.beta;
  res.seed = cell.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    Eigen::MatrixXd prediction;
    if (cell.alpha == 0.0) {
      res.mt = MaliciousMatrix::empty(ratings.num_items());
      prediction = util.baseline;
    } else {
      const AttackBudget budget(cell.alpha, cfg.budget_b, cfg.rating_cap);
      SolverConfig solver = cfg.solver;
      solver.seed = mix_seed(cell.seed, 0x50F7);
      if (cell.attack == "pga") {
        PgaConfig pga = cfg.pga;
        pga.seed = cell.seed;
        res.mt = pga_attack(ratings, budget, solver, util, pga);
      } else if (cell.attack == "sgld") {
        SgldConfig sgld = cfg.sgld;
        sgld.beta = cell.beta;
        sgld.seed = cell.seed;
        res.mt = sgld_attack(ratings, budget, solver, util, sgld);
      } else if (cell.attack == "uniform") {
        res.mt = sample_support(budget.num_malicious(ratings.num_users()), ratings.num_items(),
                                budget.max_items, budget.rating_cap, cell.seed);
      } else {
        throw std::runtime_error("unknown attack kind '" + cell.attack + "'");
      }
      if (!check_feasible(res.mt, budget))
        throw std::runtime_error("attack produced an infeasible block");
      prediction = fit_predict(solver, ratings, res.mt);
    }

    res.rmse = cell.alpha == 0.0 ? 0.0 : rmse_unseen(prediction, util.baseline, util.observed);
    res.avg_rating = avg_item_rating(prediction, target);
    if (res.mt.num_malicious() > 0) {
      const TTestResult tt = item_choice_t_test(ratings, res.mt);
      res.t_stat = tt.t;
      res.p_value = tt.p;
    }
    res.utility = utility_value(prediction, util);
  } catch (const std::exception& err) {
    res.error = err.what();
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);

  ExperimentResult result;
  result.ratings = load_data(cfg);
  const SparseRatings& ratings = result.ratings;

  SolverConfig clean_solver = cfg.solver;
  clean_solver.seed = mix_seed(cfg.seed, 0xC1EA);
  result.baseline = fit_predict(clean_solver, ratings, MaliciousMatrix::empty(ratings.num_items()));
  result.target_item = select_target_item(cfg, result.baseline);

  UtilityConfig util;
  util.mu1 = cfg.mu1;
  util.mu2 = cfg.mu2;
  util.target_items = {result.target_item};
  util.target_weights = {cfg.target_weight};
  util.baseline = result.baseline;
  util.observed = evaluation_mask(cfg, ratings);

  std::vector<Cell> cells;
  for (double alpha : cfg.alpha_list) {
    for (const std::string& attack : cfg.attacks) {
      if (attack == "sgld") {
        for (double beta : cfg.beta_list)
          cells.push_back({alpha, attack, beta, 0});
      } else {
        cells.push_back({alpha, attack, 0.0, 0});
      }
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c) cells[c].seed = mix_seed(cfg.seed, c + 1);

  result.cells.resize(cells.size());
  if (cfg.threads > 1) {
    std::vector<std::future<CellResult>> futures;
    futures.reserve(cells.size());
    for (const Cell& cell : cells)
      futures.push_back(std::async(std::launch::async, [&, cell] {
        return run_cell(cfg, cell, ratings, util, result.target_item);
      }));
    for (std::size_t c = 0; c < cells.size(); ++c) result.cells[c] = futures[c].get();
  } else {
    for (std::size_t c = 0; c < cells.size(); ++c)
      result.cells[c] = run_cell(cfg, cells[c], ratings, util, result.target_item);
  }

  const std::filesystem::path out_dir(cfg.output_dir);
  std::ofstream csv(out_dir / "results.csv");
  if (!csv) throw std::runtime_error("run_experiment: cannot write results.csv");
  csv << results_csv_header() << "\n";
  for (const CellResult& cell : result.cells) csv << results_csv_row(cell, cfg.mu1, cfg.mu2) << "\n";

  if (cfg.save_attacks) {
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
      const CellResult& cell = result.cells[c];
      if (cell.mt.num_malicious() == 0) continue;
      std::stringstream name;
      name << "mt_" << c << "_" << cell.attack << ".csv";
      save_malicious_csv(cell.mt, (out_dir / name.str()).string());
    }
  }

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["data"] = {{"source", cfg.data_source},
                      {"path", cfg.data_path},
                      {"users", ratings.num_users()},
                      {"items", ratings.num_items()},
                      {"entries", ratings.num_entries()}};
  manifest["seed"] = cfg.seed;
  manifest["target_item"] = result.target_item;
  manifest["solver"] = cfg.solver.kind == SolverConfig::Kind::Als ? "als" : "nuclear";
  manifest["mu1"] = cfg.mu1;
  manifest["mu2"] = cfg.mu2;
  manifest["alpha"] = cfg.alpha_list;
  manifest["attacks"] = cfg.attacks;
  manifest["beta"] = cfg.beta_list;
  manifest["budget_b"] = cfg.budget_b;
  manifest["rating_cap"] = cfg.rating_cap;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";

  return result;
}

}  // namespace cfpoison
