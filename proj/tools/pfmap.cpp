#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "pfmap/complexity.hpp"
#include "pfmap/gpml.hpp"
#include "pfmap/harness.hpp"
#include "pfmap/pacbayes.hpp"
#include "pfmap/rng.hpp"

namespace {

using nlohmann::json;

pfmap::ExperimentConfig resolve_config(const std::string& config_path,
                                       const std::string& experiment,
                                       std::int64_t seed, int workers,
                                       const std::string& out_dir) {
  pfmap::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = pfmap::load_config(config_path);
  cfg.experiment = experiment;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (workers > 0) cfg.workers = workers;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

void print_measures_csv_row(const std::string& table) {
  const pfmap::BooleanFunction f = pfmap::BooleanFunction::from_table_string(table);
  std::printf("%s,%.17g,%.17g,%d,%.17g,%.17g\n", table.c_str(),
              pfmap::lz_complexity(f.bits), pfmap::entropy(f.bits),
              pfmap::boolean_expr_complexity(f),
              f.n_inputs >= 2 ? pfmap::generalization_complexity(f) : 0.0,
              pfmap::critical_sample_ratio(f));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parameter-function map laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::int64_t seed = -1;
  int workers = 0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "master seed (overrides config)");
  app.add_option("--workers", workers, "worker threads (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides config)");

  auto* sample = app.add_subcommand(
      "sample", "sample the parameter-function map, rank plot + complexity");
  auto* complexity =
      app.add_subcommand("complexity", "complexity measures of truth tables");
  std::vector<std::string> tables;
  std::string table_file;
  complexity->add_option("tables", tables, "truth tables ('0'/'1' strings)");
  complexity->add_option("--file", table_file, "file with one table per line");
  auto* agreement = app.add_subcommand(
      "gp-agreement", "network vs GP labeling frequencies on fixed inputs");
  auto* corruption = app.add_subcommand(
      "corruption-sweep", "label corruption vs marginal likelihood and bound");
  auto* sgdabi = app.add_subcommand(
      "sgd-vs-abi", "optimizer function probabilities vs Bayesian posterior");
  auto* bound = app.add_subcommand("bound", "realizable PAC-Bayes bound");
  double b_log_pu = 0.0, b_delta = 0.05;
  int b_m = 0;
  bound->add_option("--log-pu", b_log_pu, "natural log of P(U)")->required();
  bound->add_option("--m", b_m, "training set size")->required();
  bound->add_option("--delta", b_delta, "confidence parameter");
  auto* train_cmd =
      app.add_subcommand("train", "single training run on the Boolean target");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      const auto cfg =
          resolve_config(config_path, "prob-complexity", seed, workers, out_dir);
      const auto rep = pfmap::run_prob_complexity(cfg);
      std::printf("distinct=%zu exported=%zu pearson(log2P,LZ)=%.4f\n",
                  rep.distinct_functions, rep.exported_functions,
                  rep.pearson_log2p_lz);
    } else if (complexity->parsed()) {
      if (!table_file.empty()) {
        std::ifstream f(table_file);
        if (!f) throw std::runtime_error("cannot open " + table_file);
        std::string line;
        while (std::getline(f, line))
          if (!line.empty()) tables.push_back(line);
      }
      if (tables.empty())
        throw std::runtime_error("complexity: no truth tables given");
      std::printf("truth_table,lz,entropy,boolexpr,gencomp,csr\n");
      for (const std::string& t : tables) print_measures_csv_row(t);
    } else if (agreement->parsed()) {
      const auto cfg =
          resolve_config(config_path, "gp-agreement", seed, workers, out_dir);
      const auto rep = pfmap::run_nn_gp_agreement(cfg);
      std::printf("common=%zu pearson(log freq)=%.4f\n", rep.common_labelings,
                  rep.pearson_log_freq);
    } else if (corruption->parsed()) {
      const auto cfg = resolve_config(config_path, "corruption-sweep", seed,
                                      workers, out_dir);
      for (const auto& row : pfmap::run_corruption_sweep(cfg))
        std::printf("corruption=%.2f logP(U)=%.2f bound=%.4f error=%.4f\n",
                    row.corruption, row.log_pu, row.bound, row.mean_test_error);
    } else if (sgdabi->parsed()) {
      const auto cfg =
          resolve_config(config_path, "sgd-vs-abi", seed, workers, out_dir);
      const auto rep = pfmap::run_sgd_vs_abi(cfg);
      std::printf("functions=%zu rho=%.4f p=%.3g converged=%zu/%zu\n",
                  rep.functions.size(), rep.rho, rep.p_value,
                  rep.runs_converged, rep.runs_total);
    } else if (bound->parsed()) {
      const auto r = pfmap::realizable_bound(b_log_pu, b_m, b_delta);
      json out{{"log_pu", r.log_pu},
               {"m", r.m},
               {"delta", r.delta},
               {"rhs", r.rhs},
               {"epsilon_bound", r.epsilon_bound}};
      std::printf("%s\n", out.dump().c_str());
    } else if (train_cmd->parsed()) {
      auto cfg = resolve_config(config_path, "train", seed, workers, out_dir);
      const pfmap::BooleanFunction target =
          pfmap::BooleanFunction::from_table_string(
              cfg.target_table.empty() ? pfmap::kDefaultSgdAbiTarget
                                       : cfg.target_table);
      pfmap::NetworkSpec spec;
      spec.layer_sizes = cfg.layer_sizes;
      const Eigen::MatrixXd X = pfmap::all_binary_inputs(target.n_inputs);
      pfmap::BitVec y = target.bits;
      const auto res = pfmap::train(spec, X, y, cfg.train, cfg.seed);
      json out{{"seed", res.seed},
               {"steps", res.steps},
               {"reached_zero_error", res.reached_zero_error},
               {"param_distance", res.param_distance},
               {"train_error", res.train_error},
               {"function", res.function.n_inputs > 0
                                ? res.function.bits.to_string()
                                : ""}};
      std::printf("%s\n", out.dump().c_str());
    }
  } catch (const std::exception& e) {
    json err{{"error", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
