#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pfmap/boolfn.hpp"
#include "pfmap/rng.hpp"

namespace pfmap {

enum class Activation { relu };
enum class Readout { step, probit };

struct NetworkSpec {
  std::vector<int> layer_sizes;  // e.g. {7, 40, 40, 1}
  Activation activation = Activation::relu;
  Readout readout = Readout::step;

  void validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int n_weight_layers() const {
    return static_cast<int>(layer_sizes.size()) - 1;
  }
};

enum class DistKind { gaussian, uniform_cube };

// Per-coordinate variance: weights into a fan_in-n layer get sigma_w^2/n,
// biases sigma_b^2. uniform_cube matches those variances on an interval.
struct ParamDistribution {
  DistKind kind = DistKind::gaussian;
  double sigma_w = 1.0;
  double sigma_b = 0.0;
};

// Flat parameters: weights for each layer (row-major, [out][in]) in layer
// order, then biases for each layer.
struct ParamVector {
  std::vector<int> layer_sizes;
  std::vector<double> values;
};

std::size_t param_count(const NetworkSpec& spec);
std::size_t weight_offset(const NetworkSpec& spec, int layer);
std::size_t bias_offset(const NetworkSpec& spec, int layer);

ParamVector sample_params(const NetworkSpec& spec, const ParamDistribution& dist,
                          std::uint64_t seed);
void sample_params_into(const NetworkSpec& spec, const ParamDistribution& dist,
                        Rng& rng, std::vector<double>& out);

// Pre-readout scalar output; hidden layers apply relu, the output layer is
// affine.
double forward(const NetworkSpec& spec, const ParamVector& params,
               const std::vector<double>& x);

// Truth table over all 2^n inputs in numerical order, fed as 0.0/1.0
// reals; output 1 iff the pre-readout value is > 0 (ties go to 0).
BooleanFunction to_function(const NetworkSpec& spec, const ParamVector& params);

double param_distance(const ParamVector& a, const ParamVector& b);

// 2^n x n matrix whose row i is the binary expansion of i (big-endian).
Eigen::MatrixXd all_binary_inputs(int n);

// Reusable batched evaluator for one spec and a fixed input set; the
// sampling loops call this millions of times.
class BatchedForward {
 public:
  BatchedForward(NetworkSpec spec, Eigen::MatrixXd inputs);

  // params laid out as in ParamVector; returns pre-readout outputs per row
  const Eigen::VectorXd& eval(const double* params);

  const NetworkSpec& spec() const { return spec_; }
  Eigen::Index n_rows() const { return inputs_.rows(); }

 private:
  NetworkSpec spec_;
  Eigen::MatrixXd inputs_;
  std::vector<Eigen::MatrixXd> buf_;
  Eigen::VectorXd out_;
};

}  // namespace pfmap
