#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pfmap/boolfn.hpp"
#include "pfmap/net.hpp"

namespace pfmap {

enum class TrainAlgo { sgd, advsgd, adam };
enum class LossKind { bce, mse };

struct TrainConfig {
  TrainAlgo algo = TrainAlgo::advsgd;
  double learning_rate = 0.01;
  int batch_size = 10;
  std::uint64_t max_steps = 150000;
  LossKind loss = LossKind::bce;
  double ema_decay = 0.9;     // advsgd error moving average
  double softmax_temp = 1.0;  // advsgd batch selection temperature
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  ParamDistribution init{DistKind::gaussian, 1.0, 1.0};
  std::uint64_t accuracy_check_every = 1;
  bool extract_function = true;  // truth table of the final net (small inputs)
};

struct TrainResult {
  BooleanFunction function;  // empty when not extracted (large input dim)
  std::uint64_t steps = 0;
  bool reached_zero_error = false;
  double param_distance = 0.0;  // |theta_final - theta_init|
  std::uint64_t seed = 0;
  double train_error = 0.0;
  ParamVector params;  // final parameters, for held-out evaluation
};

// Optimize until the thresholded network classifies every training row
// correctly or max_steps is hit. Deterministic given the seed.
TrainResult train(const NetworkSpec& spec, const Eigen::MatrixXd& inputs,
                  const BitVec& labels, const TrainConfig& cfg,
                  std::uint64_t seed);

// softmax(scores / temp)
Eigen::VectorXd advsgd_batch_probs(const Eigen::VectorXd& scores, double temp);

// score_i <- decay * score_i + (1 - decay) * error_i for batch members
void update_scores(Eigen::VectorXd& scores, const std::vector<int>& batch_indices,
                   const std::vector<int>& batch_errors, double ema_decay);

// fraction of eval inputs where the two functions disagree
double generalization_error(const BooleanFunction& f,
                            const BooleanFunction& target,
                            const std::vector<std::vector<std::uint8_t>>& inputs);

// same, over explicit truth-table indices
double generalization_error_at(const BooleanFunction& f,
                               const BooleanFunction& target,
                               const std::vector<std::uint32_t>& indices);

// test error of a trained network on labeled rows
double threshold_error(const NetworkSpec& spec, const ParamVector& params,
                       const Eigen::MatrixXd& inputs, const BitVec& labels);

}  // namespace pfmap
