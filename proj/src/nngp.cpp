#include "pfmap/nngp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace pfmap {

namespace {

// one recursion layer on the 2x2 sub-kernel of a pair
inline void arccos_layer(double& kxx, double& kyy, double& kxy, double sw2,
                         double sb2) {
  const double norm2 = kxx * kyy;
  double cross = 0.0;
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    const double c = std::clamp(kxy / norm, -1.0, 1.0);
    const double theta = std::acos(c);
    cross = norm * (std::sin(theta) + (std::numbers::pi - theta) * c);
  }
  kxy = sb2 + sw2 / (2.0 * std::numbers::pi) * cross;
  kxx = sb2 + 0.5 * sw2 * kxx;
  kyy = sb2 + 0.5 * sw2 * kyy;
}

}  // namespace

double kernel_entry(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    int depth, double sigma_w, double sigma_b) {
  if (x.size() != y.size() || x.size() == 0)
    throw std::invalid_argument("kernel_entry: dimension mismatch");
  if (depth < 1) throw std::invalid_argument("kernel_entry: depth < 1");
  const double d = static_cast<double>(x.size());
  const double sw2 = sigma_w * sigma_w;
  const double sb2 = sigma_b * sigma_b;

  double kxx = sb2 + sw2 * x.dot(x) / d;
  double kyy = sb2 + sw2 * y.dot(y) / d;
  double kxy = sb2 + sw2 * x.dot(y) / d;
  for (int l = 0; l < depth; ++l) arccos_layer(kxx, kyy, kxy, sw2, sb2);
  return kxy;
}

KernelMatrix kernel_matrix(const Eigen::MatrixXd& inputs, int depth,
                           double sigma_w, double sigma_b) {
  const Eigen::Index m = inputs.rows();
  if (m < 1) throw std::invalid_argument("kernel_matrix: no inputs");
  if (depth < 1) throw std::invalid_argument("kernel_matrix: depth < 1");

  KernelMatrix km;
  km.depth = depth;
  km.sigma_w = sigma_w;
  km.sigma_b = sigma_b;
  km.K.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double v =
          kernel_entry(inputs.row(i), inputs.row(j), depth, sigma_w, sigma_b);
      km.K(i, j) = v;
      km.K(j, i) = v;
    }
  }
  km.jitter = 1e-8 * km.K.trace() / static_cast<double>(m);
  km.K.diagonal().array() += km.jitter;

  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (Eigen::Index i = 0; i < inputs.size(); ++i) {
    std::uint64_t bits;
    const double v = inputs.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  km.fingerprint = h;
  return km;
}

Eigen::MatrixXd cholesky_lower(const KernelMatrix& km) {
  const double trace_scale = km.K.trace() / static_cast<double>(km.K.rows());
  const double max_jitter = 1e-4 * trace_scale;
  double extra = 0.0;
  for (;;) {
    Eigen::MatrixXd k = km.K;
    if (extra > 0.0) k.diagonal().array() += extra;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    extra = (extra == 0.0) ? std::max(km.jitter, 1e-12) * 10.0 : extra * 10.0;
    if (extra > max_jitter)
      throw std::runtime_error(
          "cholesky_lower: factorization failed after jitter escalation");
  }
}

BitVec sample_gp_labels(const KernelMatrix& km, std::uint64_t seed) {
  GpLabelSampler sampler(km);
  Rng rng(seed);
  return sampler.draw(rng);
}

GpLabelSampler::GpLabelSampler(const KernelMatrix& km)
    : chol_(cholesky_lower(km)) {}

BitVec GpLabelSampler::draw(Rng& rng) const {
  const Eigen::Index m = chol_.rows();
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.normal();
  BitVec labels(static_cast<std::size_t>(m));
  // y = L z, rows accumulated directly
  for (Eigen::Index i = 0; i < m; ++i) {
    const double y = chol_.row(i).head(i + 1).dot(z.head(i + 1));
    if (y > 0.0) labels.set(static_cast<std::size_t>(i), 1);
  }
  return labels;
}

FrequencyTable estimate_gp_label_frequencies(const KernelMatrix& km,
                                             std::uint64_t n_draws,
                                             std::uint64_t seed, int workers) {
  if (n_draws == 0) throw std::invalid_argument("n_draws must be >= 1");
  if (workers < 1) workers = 1;
  constexpr std::uint64_t kBlockSize = 8192;
  const std::uint64_t n_blocks = (n_draws + kBlockSize - 1) / kBlockSize;
  workers = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), n_blocks));

  GpLabelSampler sampler(km);
  std::atomic<std::uint64_t> next_block{0};
  std::mutex merge_mutex;
  FrequencyTable result;

  auto work = [&]() {
    FrequencyTable local;
    for (;;) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      const std::uint64_t count = std::min(kBlockSize, n_draws - b * kBlockSize);
      Rng rng(derive_seed(seed, b));
      for (std::uint64_t s = 0; s < count; ++s) local.add(sampler.draw(rng));
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    if (result.counts.empty())
      result = std::move(local);
    else
      result.merge(local);
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return result;
}

void save_kernel(const KernelMatrix& km, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_kernel: cannot open " + path);
  char header[256];
  std::snprintf(header, sizeof header,
                "pfmap-kernel 1\n%lld %d %.17g %.17g %.17g %llu\n",
                static_cast<long long>(km.K.rows()), km.depth, km.sigma_w,
                km.sigma_b, km.jitter,
                static_cast<unsigned long long>(km.fingerprint));
  f << header;
  // row-major little-endian doubles
  for (Eigen::Index i = 0; i < km.K.rows(); ++i)
    f.write(reinterpret_cast<const char*>(km.K.row(i).eval().data()),
            static_cast<std::streamsize>(sizeof(double) * km.K.cols()));
  if (!f) throw std::runtime_error("save_kernel: write failed");
}

KernelMatrix load_kernel(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_kernel: cannot open " + path);
  std::string magic, version;
  f >> magic >> version;
  if (magic != "pfmap-kernel" || version != "1")
    throw std::runtime_error("load_kernel: bad header");
  long long m;
  KernelMatrix km;
  unsigned long long fp;
  f >> m >> km.depth >> km.sigma_w >> km.sigma_b >> km.jitter >> fp;
  km.fingerprint = fp;
  f.get();  // trailing newline
  if (!f || m < 1) throw std::runtime_error("load_kernel: bad header fields");
  km.K.resize(m, m);
  std::vector<double> row(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    f.read(reinterpret_cast<char*>(row.data()),
           static_cast<std::streamsize>(sizeof(double) * m));
    if (!f) throw std::runtime_error("load_kernel: truncated payload");
    for (long long j = 0; j < m; ++j) km.K(i, j) = row[static_cast<std::size_t>(j)];
  }
  return km;
}

}  // namespace pfmap
