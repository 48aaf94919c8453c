#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pfmap/bits.hpp"

namespace pfmap {

// Pixels scaled to [0,1], one example per row; labels still 0-9.
struct RawDataset {
  Eigen::MatrixXd inputs;
  std::vector<std::uint8_t> labels;
  std::string source;
};

// Binary-labeled set used by the kernel/bound pipeline.
struct LabeledSet {
  Eigen::MatrixXd inputs;
  BitVec labels;
  std::string source;
};

// IDX container (big-endian magics 0x803 images / 0x801 labels).
RawDataset load_idx(const std::string& images_path,
                    const std::string& labels_path);
void write_idx(const RawDataset& data, int rows, int cols,
               const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batches: rows of 1 label byte + 3072 pixel bytes.
RawDataset load_cifar10(const std::vector<std::string>& batch_files);

// 0 for classes 0-4, 1 for classes 5-9.
BitVec binarize(const std::vector<std::uint8_t>& raw_labels);
LabeledSet make_binarized(const RawDataset& raw);

// With probability p, replace each label independently by a fair coin.
BitVec corrupt(const BitVec& labels, double p, std::uint64_t seed);

// m examples uniformly without replacement.
LabeledSet subsample(const LabeledSet& set, std::size_t m, std::uint64_t seed);

// Cache serialization: text header, label bytes, float32 pixels.
void save_labeled(const LabeledSet& set, const std::string& path);
LabeledSet load_labeled(const std::string& path);

// Deterministic stand-in for the image datasets: ten classes rendered as
// noisy intensity blobs on a side x side grid, classes 0-4 in the top half
// and 5-9 in the bottom so the binarized task is structured. Pixels are
// byte-quantized like the real files.
RawDataset synthetic_images(std::size_t count, int side, std::uint64_t seed);

}  // namespace pfmap
