#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfmap {

// Packed bit sequence. Bit i lives in words()[i/64] at position i%64.
// Unused high bits of the last word are kept zero so equality and
// hashing can work on whole words.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  static BitVec from_string(std::string_view s) {
    BitVec b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        b.set(i, 1);
      } else if (s[i] != '0') {
        throw std::invalid_argument("BitVec::from_string: expected '0'/'1'");
      }
    }
    return b;
  }

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  int get(std::size_t i) const {
    return static_cast<int>((words_[i >> 6] >> (i & 63)) & 1u);
  }

  void set(std::size_t i, int v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  std::size_t count_ones() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  BitVec complement() const {
    BitVec b(n_);
    for (std::size_t k = 0; k < words_.size(); ++k) b.words_[k] = ~words_[k];
    b.mask_tail();
    return b;
  }

  BitVec reversed() const {
    BitVec b(n_);
    for (std::size_t i = 0; i < n_; ++i) b.set(i, get(n_ - 1 - i));
    return b;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const BitVec&) const = default;

  // Lexicographic order on the bit string (position 0 compared first,
  // '0' < '1'); a proper prefix sorts before its extensions.
  bool lex_less(const BitVec& o) const {
    const std::size_t common_words =
        std::min(words_.size(), o.words_.size());
    for (std::size_t k = 0; k < common_words; ++k) {
      const std::uint64_t diff = words_[k] ^ o.words_[k];
      if (diff) {
        const int bit = std::countr_zero(diff);
        return ((words_[k] >> bit) & 1u) == 0;
      }
    }
    return n_ < o.n_;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ n_;
    for (std::uint64_t w : words_) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ULL;
      h ^= h >> 29;
    }
    return h;
  }

 private:
  void mask_tail() {
    const std::size_t rem = n_ & 63;
    if (rem && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct BitVecHash {
  std::size_t operator()(const BitVec& b) const {
    return static_cast<std::size_t>(b.hash());
  }
};

}  // namespace pfmap
