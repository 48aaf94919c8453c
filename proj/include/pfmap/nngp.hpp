#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "pfmap/bits.hpp"
#include "pfmap/fsampler.hpp"
#include "pfmap/rng.hpp"

namespace pfmap {

// Covariance of network outputs on a fixed input set under the infinite-
// width ReLU correspondence (arccosine kernel), with provenance.
struct KernelMatrix {
  Eigen::MatrixXd K;          // jitter already on the diagonal
  int depth = 1;              // number of hidden layers
  double sigma_w = 1.0;
  double sigma_b = 0.0;
  double jitter = 0.0;        // added to each diagonal entry
  std::uint64_t fingerprint = 0;  // hash of the input set

  Eigen::Index size() const { return K.rows(); }
};

// Arccosine kernel recursion for `depth` hidden ReLU layers:
//   K^0(x,x') = sigma_b^2 + sigma_w^2 * (x.x')/d
//   K^l(x,x') = sigma_b^2 + sigma_w^2/(2 pi) * sqrt(K^{l-1}(x,x) K^{l-1}(x',x'))
//               * (sin theta + (pi - theta) cos theta)
// with theta the angle of the previous layer's correlation. A zero-variance
// branch (possible for the all-zeros input with sigma_b = 0) contributes no
// correlation term.
double kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    int depth, double sigma_w, double sigma_b);

// Pairwise kernel over rows of `inputs`, diagonal jitter 1e-8 * trace/m.
KernelMatrix kernel_matrix(const Eigen::MatrixXd& inputs, int depth,
                           double sigma_w, double sigma_b);

// Lower Cholesky factor; escalates jitter by x10 up to 1e-4 * trace/m
// before giving up.
Eigen::MatrixXd cholesky_lower(const KernelMatrix& km);

// y ~ N(0, K) thresholded at zero (1 iff y_i > 0).
BitVec sample_gp_labels(const KernelMatrix& km, std::uint64_t seed);

// Factor once, draw many; used by the agreement studies.
class GpLabelSampler {
 public:
  explicit GpLabelSampler(const KernelMatrix& km);
  BitVec draw(Rng& rng) const;
  Eigen::Index size() const { return chol_.rows(); }

 private:
  Eigen::MatrixXd chol_;
};

// Frequency table over GP label draws; identical result for any worker
// count (same block seeding scheme as the network sampler).
FrequencyTable estimate_gp_label_frequencies(const KernelMatrix& km,
                                             std::uint64_t n_draws,
                                             std::uint64_t seed, int workers);

// Binary dump (text header + row-major doubles) so runs can be replayed.
void save_kernel(const KernelMatrix& km, const std::string& path);
KernelMatrix load_kernel(const std::string& path);

}  // namespace pfmap
