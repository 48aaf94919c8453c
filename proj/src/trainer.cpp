#include "pfmap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfmap/rng.hpp"

namespace pfmap {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Layers {
  std::vector<Eigen::MatrixXd> W;  // out x in
  std::vector<Eigen::VectorXd> b;

  void unpack(const NetworkSpec& spec, const std::vector<double>& flat) {
    const int L = spec.n_weight_layers();
    W.resize(L);
    b.resize(L);
    for (int l = 0; l < L; ++l) {
      const int in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
      W[l] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                            Eigen::Dynamic, Eigen::RowMajor>>(
          flat.data() + weight_offset(spec, l), out, in);
      b[l] = Eigen::Map<const Eigen::VectorXd>(
          flat.data() + bias_offset(spec, l), out);
    }
  }

  void pack(const NetworkSpec& spec, std::vector<double>& flat) const {
    flat.resize(param_count(spec));
    const int L = spec.n_weight_layers();
    for (int l = 0; l < L; ++l) {
      const int in = spec.layer_sizes[l], out = spec.layer_sizes[l + 1];
      double* w = flat.data() + weight_offset(spec, l);
      for (int o = 0; o < out; ++o)
        for (int i = 0; i < in; ++i) w[o * in + i] = W[l](o, i);
      double* bp = flat.data() + bias_offset(spec, l);
      for (int o = 0; o < out; ++o) bp[o] = b[l](o);
    }
  }
};

// forward through all layers; acts[l] holds the post-relu activations of
// hidden layer l, the last entry the affine outputs
void forward_batch(const Layers& net, const Eigen::MatrixXd& X,
                   std::vector<Eigen::MatrixXd>& acts) {
  const int L = static_cast<int>(net.W.size());
  acts.resize(L);
  const Eigen::MatrixXd* prev = &X;
  for (int l = 0; l < L; ++l) {
    acts[l].noalias() = (*prev) * net.W[l].transpose();
    acts[l].rowwise() += net.b[l].transpose();
    if (l + 1 < L) acts[l] = acts[l].cwiseMax(0.0);
    prev = &acts[l];
  }
}

// number of misclassified rows; stops early once nonzero if early_exit
std::size_t count_errors(const Layers& net, const Eigen::MatrixXd& X,
                         const BitVec& y, bool early_exit,
                         std::vector<Eigen::MatrixXd>& scratch) {
  const Eigen::Index n = X.rows();
  constexpr Eigen::Index kChunk = 128;
  std::size_t errors = 0;
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    forward_batch(net, X.middleRows(start, len), scratch);
    const Eigen::MatrixXd& out = scratch.back();
    for (Eigen::Index i = 0; i < len; ++i) {
      const int pred = out(i, 0) > 0.0 ? 1 : 0;
      if (pred != y.get(static_cast<std::size_t>(start + i))) ++errors;
    }
    if (early_exit && errors) return errors;
  }
  return errors;
}

}  // namespace

Eigen::VectorXd advsgd_batch_probs(const Eigen::VectorXd& scores, double temp) {
  if (scores.size() < 1)
    throw std::invalid_argument("advsgd_batch_probs: empty scores");
  if (temp <= 0.0) throw std::invalid_argument("advsgd_batch_probs: temp <= 0");
  Eigen::VectorXd s = scores / temp;
  const double mx = s.maxCoeff();
  Eigen::VectorXd p = (s.array() - mx).exp();
  p /= p.sum();
  return p;
}

void update_scores(Eigen::VectorXd& scores, const std::vector<int>& batch_indices,
                   const std::vector<int>& batch_errors, double ema_decay) {
  if (batch_indices.size() != batch_errors.size())
    throw std::invalid_argument("update_scores: size mismatch");
  for (std::size_t k = 0; k < batch_indices.size(); ++k) {
    const int i = batch_indices[k];
    if (i < 0 || i >= scores.size())
      throw std::invalid_argument("update_scores: index out of range");
    scores[i] = ema_decay * scores[i] + (1.0 - ema_decay) * batch_errors[k];
  }
}

TrainResult train(const NetworkSpec& spec, const Eigen::MatrixXd& inputs,
                  const BitVec& labels, const TrainConfig& cfg,
                  std::uint64_t seed) {
  spec.validate();
  if (spec.output_dim() != 1)
    throw std::invalid_argument("train: output layer size must be 1");
  const Eigen::Index n = inputs.rows();
  if (n < 1 || static_cast<std::size_t>(n) != labels.size())
    throw std::invalid_argument("train: |inputs| != |labels| or empty");
  if (inputs.cols() != spec.input_dim())
    throw std::invalid_argument("train: input dimension mismatch");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: lr <= 0");
  if (cfg.ema_decay <= 0.0 || cfg.ema_decay >= 1.0)
    throw std::invalid_argument("train: ema_decay out of (0,1)");
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(n));
  if (batch < 1) throw std::invalid_argument("train: batch_size < 1");

  Rng rng(seed);
  std::vector<double> flat0;
  sample_params_into(spec, cfg.init, rng, flat0);

  Layers net;
  net.unpack(spec, flat0);
  const int L = spec.n_weight_layers();

  // Adam moments
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  if (cfg.algo == TrainAlgo::adam) {
    mW.resize(L);
    vW.resize(L);
    mb.resize(L);
    vb.resize(L);
    for (int l = 0; l < L; ++l) {
      mW[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
      vW[l] = mW[l];
      mb[l] = Eigen::VectorXd::Zero(net.b[l].size());
      vb[l] = mb[l];
    }
  }

  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n);  // advsgd error EMAs
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] =
      static_cast<int>(i);

  Eigen::MatrixXd Xb(batch, inputs.cols());
  Eigen::VectorXd yb(batch);
  std::vector<int> batch_idx(static_cast<std::size_t>(batch));
  std::vector<Eigen::MatrixXd> acts, scratch;
  std::vector<Eigen::MatrixXd> deltas(L);

  TrainResult res;
  res.seed = seed;

  // a freshly initialized net may already fit the labels
  bool done = count_errors(net, inputs, labels, true, scratch) == 0;

  std::uint64_t step = 0;
  double adam_t = 0.0;
  while (!done && step < cfg.max_steps) {
    ++step;

    // pick the mini-batch
    if (cfg.algo == TrainAlgo::advsgd) {
      Eigen::VectorXd p = advsgd_batch_probs(scores, cfg.softmax_temp);
      double mass = 1.0;
      std::vector<bool> taken(static_cast<std::size_t>(n), false);
      for (int k = 0; k < batch; ++k) {
        double u = rng.u01() * mass;
        int pick = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (taken[static_cast<std::size_t>(i)]) continue;
          u -= p[i];
          if (u <= 0.0) {
            pick = static_cast<int>(i);
            break;
          }
        }
        if (pick < 0) {  // numeric slack: take the last untaken index
          for (Eigen::Index i = n - 1; i >= 0; --i)
            if (!taken[static_cast<std::size_t>(i)]) {
              pick = static_cast<int>(i);
              break;
            }
        }
        taken[static_cast<std::size_t>(pick)] = true;
        mass -= p[pick];
        batch_idx[static_cast<std::size_t>(k)] = pick;
      }
    } else {
      for (int k = 0; k < batch; ++k) {
        const int j = k + static_cast<int>(rng.below(static_cast<std::uint32_t>(
                              n - k)));
        std::swap(pool[static_cast<std::size_t>(k)],
                  pool[static_cast<std::size_t>(j)]);
        batch_idx[static_cast<std::size_t>(k)] = pool[static_cast<std::size_t>(k)];
      }
    }
    for (int k = 0; k < batch; ++k) {
      Xb.row(k) = inputs.row(batch_idx[static_cast<std::size_t>(k)]);
      yb[k] = labels.get(static_cast<std::size_t>(
          batch_idx[static_cast<std::size_t>(k)]));
    }

    // forward + output gradient
    forward_batch(net, Xb, acts);
    Eigen::VectorXd z = acts.back().col(0);
    Eigen::VectorXd dz(batch);
    for (int k = 0; k < batch; ++k) {
      const double pk = sigmoid(z[k]);
      if (cfg.loss == LossKind::bce)
        dz[k] = (pk - yb[k]) / batch;
      else
        dz[k] = 2.0 * (pk - yb[k]) * pk * (1.0 - pk) / batch;
    }

    // backward
    deltas[L - 1] = dz;
    for (int l = L - 2; l >= 0; --l) {
      deltas[l].noalias() = deltas[l + 1] * net.W[l + 1];
      deltas[l] = deltas[l].cwiseProduct(
          (acts[l].array() > 0.0).cast<double>().matrix());
    }

    for (int l = 0; l < L; ++l) {
      const Eigen::MatrixXd& a_in = (l == 0) ? Xb : acts[l - 1];
      Eigen::MatrixXd gW = deltas[l].transpose() * a_in;
      Eigen::VectorXd gb = deltas[l].colwise().sum();
      if (cfg.algo == TrainAlgo::adam) {
        adam_t = static_cast<double>(step);
        mW[l] = cfg.adam_beta1 * mW[l] + (1.0 - cfg.adam_beta1) * gW;
        vW[l] = cfg.adam_beta2 * vW[l] +
                (1.0 - cfg.adam_beta2) * gW.cwiseProduct(gW);
        mb[l] = cfg.adam_beta1 * mb[l] + (1.0 - cfg.adam_beta1) * gb;
        vb[l] = cfg.adam_beta2 * vb[l] +
                (1.0 - cfg.adam_beta2) * gb.cwiseProduct(gb);
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, adam_t);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, adam_t);
        net.W[l] -= (cfg.learning_rate / bc1) *
                    (mW[l].array() /
                     ((vW[l].array() / bc2).sqrt() + cfg.adam_eps))
                        .matrix();
        net.b[l] -= (cfg.learning_rate / bc1) *
                    (mb[l].array() /
                     ((vb[l].array() / bc2).sqrt() + cfg.adam_eps))
                        .matrix();
      } else {
        net.W[l] -= cfg.learning_rate * gW;
        net.b[l] -= cfg.learning_rate * gb;
      }
    }

    // advsgd bookkeeping: refresh per-example errors of this batch
    if (cfg.algo == TrainAlgo::advsgd) {
      forward_batch(net, Xb, scratch);
      std::vector<int> errs(static_cast<std::size_t>(batch));
      for (int k = 0; k < batch; ++k) {
        const int pred = scratch.back()(k, 0) > 0.0 ? 1 : 0;
        errs[static_cast<std::size_t>(k)] =
            pred != static_cast<int>(yb[k]) ? 1 : 0;
      }
      update_scores(scores, batch_idx, errs, cfg.ema_decay);
    }

    if (step % cfg.accuracy_check_every == 0)
      done = count_errors(net, inputs, labels, true, scratch) == 0;
  }

  res.steps = step;
  res.reached_zero_error = done;

  std::vector<double> flat1;
  net.pack(spec, flat1);
  double d2 = 0.0;
  for (std::size_t i = 0; i < flat1.size(); ++i) {
    const double d = flat1[i] - flat0[i];
    d2 += d * d;
  }
  res.param_distance = std::sqrt(d2);
  res.params.layer_sizes = spec.layer_sizes;
  res.params.values = std::move(flat1);
  res.train_error =
      static_cast<double>(count_errors(net, inputs, labels, false, scratch)) /
      static_cast<double>(n);

  if (cfg.extract_function && spec.input_dim() <= 16)
    res.function = to_function(spec, res.params);
  return res;
}

double generalization_error(const BooleanFunction& f,
                            const BooleanFunction& target,
                            const std::vector<std::vector<std::uint8_t>>& inputs) {
  if (f.n_inputs != target.n_inputs)
    throw std::invalid_argument("generalization_error: arity mismatch");
  if (inputs.empty()) return 0.0;
  std::size_t disagree = 0;
  for (const auto& x : inputs)
    if (evaluate(f, x) != evaluate(target, x)) ++disagree;
  return static_cast<double>(disagree) / static_cast<double>(inputs.size());
}

double generalization_error_at(const BooleanFunction& f,
                               const BooleanFunction& target,
                               const std::vector<std::uint32_t>& indices) {
  if (f.n_inputs != target.n_inputs)
    throw std::invalid_argument("generalization_error: arity mismatch");
  if (indices.empty()) return 0.0;
  std::size_t disagree = 0;
  for (std::uint32_t i : indices)
    if (f.bits.get(i) != target.bits.get(i)) ++disagree;
  return static_cast<double>(disagree) / static_cast<double>(indices.size());
}

double threshold_error(const NetworkSpec& spec, const ParamVector& params,
                       const Eigen::MatrixXd& inputs, const BitVec& labels) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size())
    throw std::invalid_argument("threshold_error: |inputs| != |labels|");
  BatchedForward bf(spec, inputs);
  const Eigen::VectorXd& y = bf.eval(params.values.data());
  std::size_t wrong = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int pred = y[i] > 0.0 ? 1 : 0;
    if (pred != labels.get(static_cast<std::size_t>(i))) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(inputs.rows());
}

}  // namespace pfmap
