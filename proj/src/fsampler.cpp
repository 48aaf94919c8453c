#include "pfmap/fsampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "pfmap/rng.hpp"

namespace pfmap {

namespace {

constexpr std::uint64_t kBlockSize = 8192;

FrequencyTable sample_blocks(const NetworkSpec& spec,
                             const ParamDistribution& dist,
                             const Eigen::MatrixXd& inputs,
                             std::uint64_t n_samples, std::uint64_t seed,
                             int workers) {
  spec.validate();
  if (spec.output_dim() != 1)
    throw std::invalid_argument("sampling requires a single output unit");
  if (n_samples == 0) throw std::invalid_argument("n_samples must be >= 1");
  if (workers < 1) workers = 1;

  const std::uint64_t n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  workers = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), n_blocks));

  std::atomic<std::uint64_t> next_block{0};
  std::mutex merge_mutex;
  FrequencyTable result;

  auto work = [&]() {
    BatchedForward bf(spec, inputs);
    const std::size_t m = static_cast<std::size_t>(inputs.rows());
    std::vector<double> params;
    FrequencyTable local;
    for (;;) {
      const std::uint64_t b = next_block.fetch_add(1);
      if (b >= n_blocks) break;
      const std::uint64_t count =
          std::min(kBlockSize, n_samples - b * kBlockSize);
      Rng rng(derive_seed(seed, b));
      for (std::uint64_t s = 0; s < count; ++s) {
        sample_params_into(spec, dist, rng, params);
        const Eigen::VectorXd& y = bf.eval(params.data());
        BitVec key(m);
        for (std::size_t i = 0; i < m; ++i)
          if (y[static_cast<Eigen::Index>(i)] > 0.0) key.set(i, 1);
        local.add(key);
      }
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
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace

FrequencyTable estimate_frequencies(const NetworkSpec& spec,
                                    const ParamDistribution& dist,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    int workers) {
  if (spec.input_dim() > kMaxBoolInputs)
    throw std::invalid_argument("estimate_frequencies: input dimension > 20");
  return sample_blocks(spec, dist, all_binary_inputs(spec.input_dim()),
                       n_samples, seed, workers);
}

FrequencyTable estimate_label_frequencies(const NetworkSpec& spec,
                                          const ParamDistribution& dist,
                                          const Eigen::MatrixXd& inputs,
                                          std::uint64_t n_samples,
                                          std::uint64_t seed, int workers) {
  return sample_blocks(spec, dist, inputs, n_samples, seed, workers);
}

RankProfile rank_profile(const FrequencyTable& t) {
  if (t.total == 0) throw std::invalid_argument("rank_profile: empty table");
  RankProfile rp;
  rp.total = t.total;
  rp.entries.reserve(t.counts.size());
  for (const auto& [key, c] : t.counts) {
    RankEntry e;
    e.count = c;
    e.key = key;
    rp.entries.push_back(std::move(e));
  }
  std::sort(rp.entries.begin(), rp.entries.end(),
            [](const RankEntry& a, const RankEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.key.lex_less(b.key);
            });
  for (std::size_t i = 0; i < rp.entries.size(); ++i) {
    rp.entries[i].rank = i + 1;
    rp.entries[i].probability =
        static_cast<double>(rp.entries[i].count) / static_cast<double>(t.total);
  }
  return rp;
}

double zipf_reference(std::uint64_t rank, double n_outputs) {
  if (rank < 1) throw std::invalid_argument("zipf_reference: rank < 1");
  if (n_outputs <= 1.0)
    throw std::invalid_argument("zipf_reference: n_outputs <= 1");
  return 1.0 / (std::log(n_outputs) * static_cast<double>(rank));
}

FrequencyTable filter_singletons(const FrequencyTable& t) {
  FrequencyTable out;
  out.total = t.total;
  for (const auto& [key, c] : t.counts)
    if (c >= 2) out.counts.emplace(key, c);
  return out;
}

}  // namespace pfmap
