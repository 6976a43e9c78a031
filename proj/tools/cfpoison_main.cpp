// Command-line front end: synthetic data generation, single attacks, sweep
// grids, evaluation of saved attacks, and gradient validation.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfpoison/data_io.hpp"
#include "cfpoison/experiment.hpp"
#include "cfpoison/implicit_grad.hpp"
#include "cfpoison/metrics.hpp"
#include "cfpoison/version.hpp"

namespace {

using namespace cfpoison;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  long long seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "flat key=value config file");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set solver.rank=4")
      ->take_all();
  cmd->add_option("-o,--out", opts.output_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", opts.seed, "global seed (overrides seed)");
}

ExperimentConfig build_config(const CommonOpts& opts) {
  std::map<std::string, std::string> kv;
  if (!opts.config_path.empty()) kv = read_config_file(opts.config_path);
  for (const std::string& ov : opts.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects key=value, got '" + ov + "'");
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  if (!opts.output_dir.empty()) kv["output.dir"] = opts.output_dir;
  if (opts.seed >= 0) kv["seed"] = std::to_string(opts.seed);
  return config_from_map(kv);
}

void print_cells(const ExperimentResult& result, const ExperimentConfig& cfg) {
  std::cout << results_csv_header() << "\n";
  for (const CellResult& cell : result.cells)
    std::cout << results_csv_row(cell, cfg.mu1, cfg.mu2) << "\n";
}

int cmd_gen(const CommonOpts& common, int users, int items, int rank, double obs, double noise,
            double gamma) {
  ExperimentConfig cfg = build_config(common);
  SyntheticOptions opts = cfg.synth;
  if (users > 0) opts.num_users = users;
  if (items > 0) opts.num_items = items;
  if (rank > 0) opts.rank = rank;
  if (obs > 0) opts.obs_fraction = obs;
  if (noise >= 0) opts.noise_sd = noise;
  if (gamma >= 0) opts.popularity_gamma = gamma;
  opts.seed = cfg.seed;

  const SyntheticData data = generate_synthetic(opts);
  std::filesystem::create_directories(cfg.output_dir);
  const auto dir = std::filesystem::path(cfg.output_dir);
  save_raw_csv(data.ratings, (dir / "ratings.csv").string());
  std::ofstream truth(dir / "ground_truth.csv");
  for (int i = 0; i < data.ground_truth.rows(); ++i) {
    for (int j = 0; j < data.ground_truth.cols(); ++j)
      truth << (j ? "," : "") << data.ground_truth(i, j);
    truth << "\n";
  }
  std::cout << "wrote " << data.ratings.num_entries() << " ratings for " << opts.num_users << "x"
            << opts.num_items << " grid to " << (dir / "ratings.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& common) {
  const ExperimentConfig cfg = build_config(common);
  const ExperimentResult result = run_experiment(cfg);
  print_cells(result, cfg);
  int failures = 0;
  for (const CellResult& cell : result.cells) failures += !cell.error.empty();
  if (failures > 0) std::cerr << failures << " cell(s) recorded errors\n";
  return 0;
}

int cmd_attack(const CommonOpts& common, const std::string& kind, double alpha, double beta) {
  CommonOpts shaped = common;
  if (!kind.empty()) shaped.overrides.push_back("attack.kinds=" + kind);
  if (alpha >= 0) shaped.overrides.push_back("budget.alpha=" + std::to_string(alpha));
  if (beta >= 0) shaped.overrides.push_back("attack.beta=" + std::to_string(beta));
  shaped.overrides.push_back("output.save_attacks=true");
  const ExperimentConfig cfg = build_config(shaped);
  if (cfg.alpha_list.size() != 1 || cfg.attacks.size() != 1 || cfg.beta_list.size() != 1)
    throw std::runtime_error("attack runs a single cell; use sweep for grids");
  const ExperimentResult result = run_experiment(cfg);
  print_cells(result, cfg);
  return result.cells.front().error.empty() ? 0 : 1;
}

int cmd_eval(const CommonOpts& common, const std::string& mt_path) {
  const ExperimentConfig cfg = build_config(common);
  const MaliciousMatrix loaded = load_malicious_csv(mt_path);

  ExperimentConfig clean = cfg;
  clean.alpha_list = {0.0};
  clean.attacks = {"uniform"};
  const ExperimentResult base = run_experiment(clean);

  if (loaded.num_items() > base.ratings.num_items())
    throw std::runtime_error("saved attack has a different item count than the data");
  // the CSV only records the support, so widen to the dataset's item count
  const MaliciousMatrix mt(loaded.num_malicious(), base.ratings.num_items(), loaded.entries());
  const AttackBudget budget(cfg.alpha_list.front() > 0 ? cfg.alpha_list.front() : 1.0,
                            cfg.budget_b, cfg.rating_cap);
  if (!check_feasible(mt, budget)) std::cerr << "warning: saved attack violates the budget\n";

  UtilityConfig util;
  util.mu1 = cfg.mu1;
  util.mu2 = cfg.mu2;
  util.target_items = {base.target_item};
  util.target_weights = {cfg.target_weight};
  util.baseline = base.baseline;
  util.observed = base.ratings.observed_mask();

  SolverConfig solver = cfg.solver;
  solver.seed = mix_seed(cfg.seed, 0x50F7);
  const Eigen::MatrixXd prediction = fit_predict(solver, base.ratings, mt);

  CellResult cell;
  cell.alpha = static_cast<double>(mt.num_malicious()) / base.ratings.num_users();
  cell.attack = "saved";
  cell.rmse = rmse_unseen(prediction, base.baseline, util.observed);
  cell.avg_rating = avg_item_rating(prediction, base.target_item);
  const TTestResult tt = item_choice_t_test(base.ratings, mt);
  cell.t_stat = tt.t;
  cell.p_value = tt.p;
  cell.utility = utility_value(prediction, util);
  cell.seed = cfg.seed;
  std::cout << results_csv_header() << "\n" << results_csv_row(cell, cfg.mu1, cfg.mu2) << "\n";
  return 0;
}

int cmd_gradcheck(const CommonOpts& common, int instances, double eps) {
  const ExperimentConfig cfg = build_config(common);
  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    SyntheticOptions gen = cfg.synth;
    gen.seed = mix_seed(cfg.seed, 7000 + inst);
    const SyntheticData data = generate_synthetic(gen);
    const int n = gen.num_items;

    SolverConfig solver = cfg.solver;
    solver.tol = std::min(solver.tol, 1e-10);
    solver.max_sweeps = std::max(solver.max_sweeps, 20000);
    solver.seed = mix_seed(cfg.seed, 7100 + inst);

    UtilityConfig util;
    util.mu1 = cfg.mu1;
    util.mu2 = cfg.mu2;
    util.baseline = fit_predict(solver, data.ratings, MaliciousMatrix::empty(n));
    util.observed = data.ratings.observed_mask();
    if (cfg.mu2 != 0.0) {
      util.target_items = {0};
      util.target_weights = {cfg.target_weight};
    }

    const AttackBudget budget(cfg.alpha_list.front(), cfg.budget_b, cfg.rating_cap);
    const MaliciousMatrix mt =
        sample_support(budget.num_malicious(gen.num_users), n, budget.max_items,
                       budget.rating_cap, mix_seed(cfg.seed, 7200 + inst));

    SolverSession session(solver, data.ratings);
    session.fit(mt);
    const std::vector<double> implicit = session.utility_grad(mt, util);
    auto retrain = [&](const MaliciousMatrix& m) { return fit_predict(solver, data.ratings, m); };
    auto value = [&](const Eigen::MatrixXd& pred) { return utility_value(pred, util); };
    const std::vector<double> fd = finite_diff_grad(retrain, value, mt, eps);

    double num = 0.0, den = 0.0, dot = 0.0, ni = 0.0;
    for (std::size_t e = 0; e < fd.size(); ++e) {
      num += (implicit[e] - fd[e]) * (implicit[e] - fd[e]);
      den += fd[e] * fd[e];
      dot += implicit[e] * fd[e];
      ni += implicit[e] * implicit[e];
    }
    const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    const double cosine = dot / std::max(std::sqrt(ni * den), 1e-300);
    worst = std::max(worst, rel);
    std::printf("instance %d: rel_l2 %.4e cosine %.3f over %zu support entries\n", inst, rel,
                cosine, fd.size());
  }
  std::printf("worst rel_l2 %.4e\n", worst);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data poisoning toolkit for factorization-based collaborative filtering"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOpts common;

  auto* gen = app.add_subcommand("gen", "generate a synthetic ratings dataset");
  int users = 0, items = 0, rank = 0;
  double obs = -1, noise = -1, gamma = -1;
  add_common(gen, common);
  gen->add_option("--users", users, "number of users");
  gen->add_option("--items", items, "number of items");
  gen->add_option("--rank", rank, "ground-truth rank");
  gen->add_option("--obs", obs, "observed fraction per user");
  gen->add_option("--noise", noise, "observation noise standard deviation");
  gen->add_option("--gamma", gamma, "item popularity power-law exponent (0 = uniform)");

  auto* attack = app.add_subcommand("attack", "run one attack cell and save the fake ratings");
  std::string attack_kind;
  double attack_alpha = -1, attack_beta = -1;
  add_common(attack, common);
  attack->add_option("--kind", attack_kind, "pga | sgld | uniform");
  attack->add_option("--alpha", attack_alpha, "malicious user fraction");
  attack->add_option("--beta", attack_beta, "sgld utility weight");

  auto* sweep = app.add_subcommand("sweep", "run the full (alpha x attack x beta) grid");
  add_common(sweep, common);

  auto* eval = app.add_subcommand("eval", "metrics for a saved fake-rating block");
  std::string mt_path;
  add_common(eval, common);
  eval->add_option("--mt", mt_path, "fake-rating CSV (user,item,rating)")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "implicit gradients vs finite differences");
  int instances = 3;
  double eps = 1e-4;
  add_common(gradcheck, common);
  gradcheck->add_option("--instances", instances, "number of random instances");
  gradcheck->add_option("--eps", eps, "finite difference step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(common, users, items, rank, obs, noise, gamma);
    if (attack->parsed()) return cmd_attack(common, attack_kind, attack_alpha, attack_beta);
    if (sweep->parsed()) return cmd_sweep(common);
    if (eval->parsed()) return cmd_eval(common, mt_path);
    if (gradcheck->parsed()) return cmd_gradcheck(common, instances, eps);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
