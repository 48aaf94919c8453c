#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pfmap/bits.hpp"
#include "pfmap/net.hpp"

namespace pfmap {

// Counts of observed truth tables (or label vectors). Mergeable; the key
// set stays unordered, consumers sort on export.
struct FrequencyTable {
  std::unordered_map<BitVec, std::uint64_t, BitVecHash> counts;
  std::uint64_t total = 0;

  void add(const BitVec& key, std::uint64_t k = 1) {
    counts[key] += k;
    total += k;
  }
  void merge(const FrequencyTable& other) {
    for (const auto& [key, c] : other.counts) counts[key] += c;
    total += other.total;
  }
};

// Draw n_samples parameter vectors, map each through to_function, count.
// Work is split into fixed blocks with per-block seeds derived from `seed`,
// so the result is identical for any worker count.
FrequencyTable estimate_frequencies(const NetworkSpec& spec,
                                    const ParamDistribution& dist,
                                    std::uint64_t n_samples, std::uint64_t seed,
                                    int workers);

// Same sampling loop, but keys are the thresholded outputs on an arbitrary
// fixed input set (one bit per row of `inputs`).
FrequencyTable estimate_label_frequencies(const NetworkSpec& spec,
                                          const ParamDistribution& dist,
                                          const Eigen::MatrixXd& inputs,
                                          std::uint64_t n_samples,
                                          std::uint64_t seed, int workers);

struct RankEntry {
  std::uint64_t rank = 0;  // from 1
  double probability = 0.0;
  std::uint64_t count = 0;
  BitVec key;
};

// Descending by probability; ties broken by truth-table lexicographic order.
struct RankProfile {
  std::vector<RankEntry> entries;
  std::uint64_t total = 0;
};

RankProfile rank_profile(const FrequencyTable& t);

// Normalized Zipf law P(r) = 1 / (ln(n_outputs) * r).
double zipf_reference(std::uint64_t rank, double n_outputs);

// Drop count-1 entries (finite-size artifacts); total is kept so the
// surviving probabilities stay count/total.
FrequencyTable filter_singletons(const FrequencyTable& t);

}  // namespace pfmap
