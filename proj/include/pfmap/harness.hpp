#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pfmap/datasets.hpp"
#include "pfmap/fsampler.hpp"
#include "pfmap/net.hpp"
#include "pfmap/nngp.hpp"
#include "pfmap/trainer.hpp"

namespace pfmap {

// One flat config drives every experiment; unused fields are ignored by
// the runs that do not need them. Serializable to/from JSON and embedded
// verbatim in every report for reproducibility.
struct ExperimentConfig {
  std::string experiment = "prob-complexity";
  std::uint64_t seed = 1;
  int workers = 2;
  std::string out_dir = "out";

  // network + sampling distribution
  std::vector<int> layer_sizes{7, 40, 40, 1};
  ParamDistribution dist{DistKind::gaussian, 1.0, 1.0};
  std::uint64_t n_samples = 1000000;

  // prob-complexity sweeps (optional extra runs in subdirectories)
  std::vector<std::vector<int>> layer_sweep;
  double envelope_bin_width = 1.0;

  // GP side
  double gp_sigma_w = 1.0;
  double gp_sigma_b = 1.0;
  int gp_depth = 0;  // 0: match the network's hidden layer count
  std::uint64_t gp_draws = 1000000;

  // data selection
  std::string dataset = "synthetic";  // synthetic | mnist | cifar10
  std::string data_dir = "data";
  int synthetic_side = 28;
  std::size_t synthetic_count = 4000;

  // nn-gp agreement
  int m_inputs = 10;

  // corruption sweep
  std::vector<double> corruption_grid{0.0, 0.25, 0.5, 1.0};
  int m_train = 200;
  int n_test = 2000;
  int train_seeds = 8;
  double delta = 0.05;

  // sgd-vs-abi
  int n_train_sets = 20;
  int runs_per_set = 200;
  int train_set_size = 118;
  std::string target_table;  // truth-table string; empty: built-in preset
  // extra sigma_w = sigma_b values to evaluate the Bayesian side under,
  // reusing the same optimizer runs
  std::vector<double> gp_sigma_sweep;

  TrainConfig train;
};

ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

// Fixed target for the optimizer-vs-Bayes comparison (K_LZ = 84.0 on 7
// inputs, found by random network sampling and frozen here).
extern const char* const kDefaultSgdAbiTarget;

struct ProbComplexityReport {
  std::size_t distinct_functions = 0;
  std::size_t exported_functions = 0;  // count >= 2 survivors
  double pearson_log2p_lz = 0.0;
  double pearson_p_value = 0.0;
  double envelope_a = 0.0;
  double envelope_b = 0.0;
  double max_excess_above_envelope = 0.0;  // over P >= 1e-3 functions, bits
  std::vector<std::pair<std::uint64_t, double>> top_ranks;  // rank, prob
};

ProbComplexityReport run_prob_complexity(const ExperimentConfig& cfg);

struct AgreementReport {
  double pearson_log_freq = 0.0;
  double pearson_p_value = 0.0;
  std::size_t common_labelings = 0;
  double pearson_ep_vs_net = 0.0;       // EP log-ML vs net log-frequency
  double pearson_laplace_vs_net = 0.0;  // Laplace log-ML vs net log-frequency
};

AgreementReport run_nn_gp_agreement(const ExperimentConfig& cfg);

struct CorruptionRow {
  double corruption = 0.0;
  double log_pu = 0.0;
  bool ep_converged = false;
  double bound = 0.0;
  double mean_test_error = 0.0;
  double mean_train_steps = 0.0;
};

std::vector<CorruptionRow> run_corruption_sweep(const ExperimentConfig& cfg);

struct AbiEstimate {
  BooleanFunction function;
  double avg_prob_sgd = 0.0;
  double avg_prob_abi = 0.0;
  int n_train_sets = 0;
  std::uint64_t sgd_count = 0;  // across all runs, pre-averaging
};

struct SgdVsAbiReport {
  std::vector<AbiEstimate> functions;  // singleton-filtered
  double rho = 0.0;
  double p_value = 0.0;
  std::size_t runs_converged = 0;
  std::size_t runs_total = 0;
  // one (sigma, rho, p) row per gp_sigma_sweep entry
  std::vector<std::array<double, 3>> sigma_sweep;
};

SgdVsAbiReport run_sgd_vs_abi(const ExperimentConfig& cfg);

// Sample Pearson correlation and two-tailed p-value from the t
// distribution with n-2 degrees of freedom.
std::pair<double, double> pearson(const std::vector<double>& xs,
                                  const std::vector<double>& ys);

// regularized incomplete beta function I_x(a,b) (used for the t-test)
double reg_inc_beta(double a, double b, double x);

// Resolve the configured dataset (synthetic generation happens through the
// IDX writer/loader so the binary format stays on the tested path).
LabeledSet load_dataset(const ExperimentConfig& cfg);

}  // namespace pfmap
