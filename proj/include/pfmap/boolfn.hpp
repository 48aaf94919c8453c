#pragma once

#include <cstdint>
#include <vector>

#include "pfmap/bits.hpp"

namespace pfmap {

inline constexpr int kMaxBoolInputs = 20;  // 2^20-bit truth table at most

// Truth table of f: {0,1}^n -> {0,1}. bits.get(i) is f applied to the
// n-bit binary expansion of i; input vectors map to indices big-endian
// (x[0] is the most significant bit). This single ordering is shared by
// truth-table strings, LZ inputs and dataset export.
struct BooleanFunction {
  int n_inputs = 0;
  BitVec bits;

  BooleanFunction() = default;
  BooleanFunction(int n, BitVec table);

  static BooleanFunction constant(int n, int value);
  static BooleanFunction from_table_string(std::string_view s);

  std::size_t table_size() const { return std::size_t{1} << n_inputs; }

  bool operator==(const BooleanFunction&) const = default;
};

struct BooleanFunctionHash {
  std::size_t operator()(const BooleanFunction& f) const {
    return static_cast<std::size_t>(f.bits.hash() ^ f.n_inputs);
  }
};

// index of x under big-endian interpretation (x[0] most significant)
std::uint32_t input_index(const std::vector<std::uint8_t>& x);

// inverse of input_index
std::vector<std::uint8_t> index_bits(std::uint32_t index, int n);

int evaluate(const BooleanFunction& f, const std::vector<std::uint8_t>& x);

// All C(n,d) vectors differing from x in exactly d positions, in
// lexicographic flip-position order.
std::vector<std::vector<std::uint8_t>> hamming_neighbors(
    const std::vector<std::uint8_t>& x, int d);

}  // namespace pfmap
