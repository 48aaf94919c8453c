#include "pfmap/net.hpp"

#include <cmath>
#include <stdexcept>

namespace pfmap {

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("NetworkSpec: need at least 2 layers");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("NetworkSpec: layer size < 1");
}

std::size_t param_count(const NetworkSpec& spec) {
  std::size_t p = 0;
  for (int l = 0; l < spec.n_weight_layers(); ++l)
    p += static_cast<std::size_t>(spec.layer_sizes[l]) * spec.layer_sizes[l + 1] +
         spec.layer_sizes[l + 1];
  return p;
}

std::size_t weight_offset(const NetworkSpec& spec, int layer) {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(spec.layer_sizes[l]) * spec.layer_sizes[l + 1];
  return off;
}

std::size_t bias_offset(const NetworkSpec& spec, int layer) {
  std::size_t off = weight_offset(spec, spec.n_weight_layers());
  for (int l = 0; l < layer; ++l) off += spec.layer_sizes[l + 1];
  return off;
}

void sample_params_into(const NetworkSpec& spec, const ParamDistribution& dist,
                        Rng& rng, std::vector<double>& out) {
  out.resize(param_count(spec));
  std::size_t k = 0;
  for (int l = 0; l < spec.n_weight_layers(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double sd = dist.sigma_w / std::sqrt(static_cast<double>(fan_in));
    const std::size_t count = static_cast<std::size_t>(fan_in) * fan_out;
    if (dist.kind == DistKind::gaussian) {
      for (std::size_t i = 0; i < count; ++i) out[k++] = sd * rng.normal();
    } else {
      const double half = sd * std::sqrt(3.0);  // same per-coordinate variance
      for (std::size_t i = 0; i < count; ++i)
        out[k++] = half * (2.0 * rng.u01() - 1.0);
    }
  }
  for (int l = 0; l < spec.n_weight_layers(); ++l) {
    const int fan_out = spec.layer_sizes[l + 1];
    if (dist.kind == DistKind::gaussian) {
      for (int i = 0; i < fan_out; ++i) out[k++] = dist.sigma_b * rng.normal();
    } else {
      const double half = dist.sigma_b * std::sqrt(3.0);
      for (int i = 0; i < fan_out; ++i)
        out[k++] = half * (2.0 * rng.u01() - 1.0);
    }
  }
}

ParamVector sample_params(const NetworkSpec& spec, const ParamDistribution& dist,
                          std::uint64_t seed) {
  spec.validate();
  if (dist.sigma_w < 0.0 || dist.sigma_b < 0.0)
    throw std::invalid_argument("ParamDistribution: negative sigma");
  Rng rng(seed);
  ParamVector pv;
  pv.layer_sizes = spec.layer_sizes;
  sample_params_into(spec, dist, rng, pv.values);
  return pv;
}

double forward(const NetworkSpec& spec, const ParamVector& params,
               const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != spec.input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  if (params.values.size() != param_count(spec))
    throw std::invalid_argument("forward: parameter count mismatch");

  std::vector<double> act(x);
  std::vector<double> next;
  for (int l = 0; l < spec.n_weight_layers(); ++l) {
    const int fan_in = spec.layer_sizes[l];
    const int fan_out = spec.layer_sizes[l + 1];
    const double* w = params.values.data() + weight_offset(spec, l);
    const double* b = params.values.data() + bias_offset(spec, l);
    next.assign(fan_out, 0.0);
    for (int o = 0; o < fan_out; ++o) {
      double z = b[o];
      for (int i = 0; i < fan_in; ++i) z += w[o * fan_in + i] * act[i];
      next[o] = (l + 1 < spec.n_weight_layers()) ? std::max(z, 0.0) : z;
    }
    act.swap(next);
  }
  return act[0];
}

Eigen::MatrixXd all_binary_inputs(int n) {
  if (n < 1 || n > kMaxBoolInputs)
    throw std::invalid_argument("all_binary_inputs: n out of range");
  const std::size_t rows = std::size_t{1} << n;
  Eigen::MatrixXd X(rows, n);
  for (std::size_t i = 0; i < rows; ++i)
    for (int j = 0; j < n; ++j)
      X(i, j) = static_cast<double>((i >> (n - 1 - j)) & 1u);
  return X;
}

BatchedForward::BatchedForward(NetworkSpec spec, Eigen::MatrixXd inputs)
    : spec_(std::move(spec)), inputs_(std::move(inputs)) {
  spec_.validate();
  if (inputs_.cols() != spec_.input_dim())
    throw std::invalid_argument("BatchedForward: input dimension mismatch");
  buf_.resize(spec_.n_weight_layers());
  for (int l = 0; l < spec_.n_weight_layers(); ++l)
    buf_[l].resize(inputs_.rows(), spec_.layer_sizes[l + 1]);
}

const Eigen::VectorXd& BatchedForward::eval(const double* params) {
  const Eigen::MatrixXd* prev = &inputs_;
  for (int l = 0; l < spec_.n_weight_layers(); ++l) {
    const int fan_in = spec_.layer_sizes[l];
    const int fan_out = spec_.layer_sizes[l + 1];
    // row-major (out x in) weights seen column-major are exactly W^T
    Eigen::Map<const Eigen::MatrixXd> wt(params + weight_offset(spec_, l),
                                         fan_in, fan_out);
    Eigen::Map<const Eigen::VectorXd> b(params + bias_offset(spec_, l), fan_out);
    buf_[l].noalias() = (*prev) * wt;
    buf_[l].rowwise() += b.transpose();
    if (l + 1 < spec_.n_weight_layers())
      buf_[l] = buf_[l].cwiseMax(0.0);
    prev = &buf_[l];
  }
  out_ = buf_.back().col(0);
  return out_;
}

BooleanFunction to_function(const NetworkSpec& spec, const ParamVector& params) {
  const int n = spec.input_dim();
  if (n > kMaxBoolInputs)
    throw std::invalid_argument("to_function: input dimension > 20");
  if (spec.output_dim() != 1)
    throw std::invalid_argument("to_function: output layer size must be 1");
  if (params.values.size() != param_count(spec))
    throw std::invalid_argument("to_function: parameter count mismatch");

  BatchedForward bf(spec, all_binary_inputs(n));
  const Eigen::VectorXd& y = bf.eval(params.values.data());
  BitVec table(std::size_t{1} << n);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) table.set(static_cast<std::size_t>(i), 1);
  return BooleanFunction(n, std::move(table));
}

double param_distance(const ParamVector& a, const ParamVector& b) {
  if (a.layer_sizes != b.layer_sizes || a.values.size() != b.values.size())
    throw std::invalid_argument("param_distance: layout mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace pfmap
