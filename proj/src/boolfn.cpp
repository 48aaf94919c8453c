#include "pfmap/boolfn.hpp"

#include <bit>
#include <stdexcept>

namespace pfmap {

BooleanFunction::BooleanFunction(int n, BitVec table)
    : n_inputs(n), bits(std::move(table)) {
  if (n < 1 || n > kMaxBoolInputs)
    throw std::invalid_argument("BooleanFunction: n_inputs out of range");
  if (bits.size() != (std::size_t{1} << n))
    throw std::invalid_argument("BooleanFunction: table length != 2^n");
}

BooleanFunction BooleanFunction::constant(int n, int value) {
  BitVec b(std::size_t{1} << n);
  if (value)
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, 1);
  return BooleanFunction(n, std::move(b));
}

BooleanFunction BooleanFunction::from_table_string(std::string_view s) {
  if (s.empty() || !std::has_single_bit(s.size()))
    throw std::invalid_argument("truth table length must be a power of two");
  const int n = std::countr_zero(s.size());
  if (n < 1) throw std::invalid_argument("truth table too short");
  return BooleanFunction(n, BitVec::from_string(s));
}

std::uint32_t input_index(const std::vector<std::uint8_t>& x) {
  std::uint32_t idx = 0;
  for (std::uint8_t b : x) idx = (idx << 1) | (b & 1u);
  return idx;
}

std::vector<std::uint8_t> index_bits(std::uint32_t index, int n) {
  std::vector<std::uint8_t> x(n);
  for (int j = 0; j < n; ++j)
    x[j] = static_cast<std::uint8_t>((index >> (n - 1 - j)) & 1u);
  return x;
}

int evaluate(const BooleanFunction& f, const std::vector<std::uint8_t>& x) {
  if (static_cast<int>(x.size()) != f.n_inputs)
    throw std::invalid_argument("evaluate: input length != n_inputs");
  return f.bits.get(input_index(x));
}

std::vector<std::vector<std::uint8_t>> hamming_neighbors(
    const std::vector<std::uint8_t>& x, int d) {
  const int n = static_cast<int>(x.size());
  if (d < 1 || d > n)
    throw std::invalid_argument("hamming_neighbors: d out of range");

  std::vector<std::vector<std::uint8_t>> out;
  std::vector<int> pos(d);
  for (int i = 0; i < d; ++i) pos[i] = i;
  for (;;) {
    std::vector<std::uint8_t> y = x;
    for (int p : pos) y[p] ^= 1u;
    out.push_back(std::move(y));

    // next combination in lexicographic order
    int i = d - 1;
    while (i >= 0 && pos[i] == n - d + i) --i;
    if (i < 0) break;
    ++pos[i];
    for (int j = i + 1; j < d; ++j) pos[j] = pos[j - 1] + 1;
  }
  return out;
}

}  // namespace pfmap
