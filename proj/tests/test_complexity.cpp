#include <doctest.h>

#include <bit>
#include <cmath>
#include <string>
#include <vector>

#include "pfmap/boolfn.hpp"
#include "pfmap/complexity.hpp"
#include "pfmap/qm.hpp"
#include "pfmap/rng.hpp"

using namespace pfmap;

TEST_SUITE_BEGIN("complexity");

namespace {

// Independent LZ76 oracle: each word is the longest prefix of the rest
// reproducible from an earlier start (overlap allowed) plus one innovation
// symbol; a reproducible trailing word still counts.
int lz76_reference(const std::string& s) {
  const int n = static_cast<int>(s.size());
  int c = 0, j = 0;
  while (j < n) {
    int k = 0;
    for (int kk = 1; j + kk <= n; ++kk) {
      bool found = false;
      for (int p = 0; p < j && !found; ++p) {
        bool match = true;
        for (int t = 0; t < kk; ++t)
          if (s[p + t] != s[j + t]) {
            match = false;
            break;
          }
        found = match;
      }
      if (found)
        k = kk;
      else
        break;
    }
    j += std::min(k + 1, n - j);
    ++c;
  }
  return c;
}

BooleanFunction parity(int n) {
  BitVec b(std::size_t{1} << n);
  for (std::size_t i = 0; i < b.size(); ++i) b.set(i, std::popcount(i) & 1u);
  return BooleanFunction(n, std::move(b));
}

BooleanFunction projection_first(int n) {
  BitVec b(std::size_t{1} << n);
  for (std::size_t i = 0; i < b.size(); ++i)
    b.set(i, (i >> (n - 1)) & 1u);  // x[0] is the top index bit
  return BooleanFunction(n, std::move(b));
}

double gencomp_oracle(const BooleanFunction& f) {
  // pair enumeration through the boolfn neighborhood API
  const int n = f.n_inputs;
  double c1 = 0.0, c2 = 0.0;
  for (std::uint32_t i = 0; i < f.table_size(); ++i) {
    const auto x = index_bits(i, n);
    for (const auto& y : hamming_neighbors(x, 1))
      c1 += std::abs(evaluate(f, x) - evaluate(f, y));
    for (const auto& y : hamming_neighbors(x, 2))
      c2 += std::abs(evaluate(f, x) - evaluate(f, y));
  }
  const double size = static_cast<double>(f.table_size());
  return c1 / (size * n) + 2.0 * c2 / (size * n * (n - 1));
}

}  // namespace

TEST_CASE("lz76 word count matches the hand-traced table") {
  const std::pair<const char*, int> table[] = {
      {"0", 1},    {"1", 1},    {"00", 2},       {"01", 2},
      {"0101", 3}, {"1010", 3}, {"0001", 2},     {"0010", 3},
      {"0110", 3}, {"01010101", 3}, {"00000000", 2}};
  for (const auto& [s, expect] : table)
    CHECK_MESSAGE(lz76_word_count(BitVec::from_string(s)) == expect, s);
}

TEST_CASE("lz76 word count agrees with the independent parser") {
  // exhaustive over all strings up to length 12
  for (int len = 1; len <= 12; ++len) {
    for (std::uint32_t bits = 0; bits < (1u << len); ++bits) {
      std::string s(len, '0');
      for (int i = 0; i < len; ++i)
        if ((bits >> i) & 1u) s[i] = '1';
      CHECK_MESSAGE(lz76_word_count(BitVec::from_string(s)) ==
                        lz76_reference(s),
                    s);
    }
  }
  // random longer strings
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 13 + static_cast<int>(rng.below(116));
    std::string s(len, '0');
    for (auto& ch : s) ch = rng.below(2) ? '1' : '0';
    CHECK(lz76_word_count(BitVec::from_string(s)) == lz76_reference(s));
  }
}

TEST_CASE("lz_complexity anchors and symmetry") {
  CHECK(lz_complexity(BitVec(128)) == doctest::Approx(7.0));
  BitVec ones(64);
  for (std::size_t i = 0; i < 64; ++i) ones.set(i, 1);
  CHECK(lz_complexity(ones) == doctest::Approx(6.0));
  CHECK(lz_complexity(BitVec::from_string("0101")) == doctest::Approx(6.0));
  CHECK_THROWS_AS(lz_complexity(BitVec()), std::invalid_argument);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    BitVec b(128);
    for (std::size_t i = 0; i < 128; ++i) b.set(i, rng.below(2));
    CHECK(lz_complexity(b) == doctest::Approx(lz_complexity(b.reversed())));
  }
}

TEST_CASE("entropy") {
  BitVec ones(100);
  for (std::size_t i = 0; i < 100; ++i) ones.set(i, 1);
  CHECK(entropy(ones) == doctest::Approx(0.0));

  BitVec half(128);
  for (std::size_t i = 0; i < 64; ++i) half.set(i, 1);
  CHECK(entropy(half) == doctest::Approx(1.0));

  BitVec skew(128);
  for (std::size_t i = 0; i < 32; ++i) skew.set(i * 2, 1);
  CHECK(entropy(skew) == doctest::Approx(0.811278124459133).epsilon(1e-9));

  // invariant under complement and any permutation of positions
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    BitVec b(64);
    for (std::size_t i = 0; i < 64; ++i) b.set(i, rng.below(2));
    CHECK(entropy(b) == doctest::Approx(entropy(b.complement())));
    CHECK(entropy(b) == doctest::Approx(entropy(b.reversed())));
    CHECK(entropy(b) >= 0.0);
    CHECK(entropy(b) <= 1.0);
  }
}

TEST_CASE("boolean expression complexity anchors") {
  CHECK(boolean_expr_complexity(BooleanFunction::constant(7, 0)) == 0);
  CHECK(boolean_expr_complexity(BooleanFunction::constant(4, 1)) == 0);
  CHECK(boolean_expr_complexity(projection_first(7)) == 0);
  // x1 AND x2 on two inputs: table 0001 in numerical order
  CHECK(boolean_expr_complexity(BooleanFunction::from_table_string("0001")) == 1);
  // OR needs one op, XOR needs more
  CHECK(boolean_expr_complexity(BooleanFunction::from_table_string("0111")) == 1);
  CHECK(boolean_expr_complexity(BooleanFunction::from_table_string("0110")) > 1);
}

TEST_CASE("minimized expressions reproduce every truth table up to n = 3") {
  for (int n = 1; n <= 3; ++n) {
    const std::size_t size = std::size_t{1} << n;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << size); ++code) {
      BitVec b(size);
      for (std::size_t i = 0; i < size; ++i) b.set(i, (code >> i) & 1u);
      const BooleanFunction f(n, b);
      const SopExpr e = minimize_sop(f);
      CHECK_FALSE(e.greedy_cover);  // exact cover at these sizes
      for (std::uint32_t x = 0; x < size; ++x)
        REQUIRE(e.evaluate(x) == f.bits.get(x));
    }
  }
}

TEST_CASE("minimization soundness on random wider functions") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(4));  // 4..7
    BitVec b(std::size_t{1} << n);
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, rng.below(2));
    const BooleanFunction f(n, b);
    const SopExpr e = minimize_sop(f);
    for (std::uint32_t x = 0; x < f.table_size(); ++x)
      REQUIRE(e.evaluate(x) == f.bits.get(x));
    CHECK(e.op_count() >= 0);
  }
  CHECK_THROWS_AS(
      boolean_expr_complexity(BooleanFunction::constant(13, 0)),
      std::invalid_argument);
}

TEST_CASE("generalization complexity anchors") {
  CHECK(generalization_complexity(BooleanFunction::constant(5, 1)) ==
        doctest::Approx(0.0));
  CHECK(generalization_complexity(parity(7)) == doctest::Approx(1.0));
  CHECK(generalization_complexity(projection_first(7)) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK_THROWS_AS(generalization_complexity(
                      BooleanFunction::from_table_string("10")),
                  std::invalid_argument);
}

TEST_CASE("generalization complexity matches the pair-enumeration oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));  // 2..5
    BitVec b(std::size_t{1} << n);
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, rng.below(2));
    const BooleanFunction f(n, b);
    const double got = generalization_complexity(f);
    CHECK(got == doctest::Approx(gencomp_oracle(f)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 2.0);
  }
}

TEST_CASE("critical sample ratio") {
  CHECK(critical_sample_ratio(BooleanFunction::constant(7, 0)) == 0.0);
  CHECK(critical_sample_ratio(parity(7)) == 1.0);

  // AND of all seven inputs: 1111111 plus the seven one-zero inputs
  BitVec andf(128);
  andf.set(127, 1);
  CHECK(critical_sample_ratio(BooleanFunction(7, andf)) ==
        doctest::Approx(8.0 / 128.0));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    BitVec b(32);
    for (std::size_t i = 0; i < 32; ++i) b.set(i, rng.below(2));
    const double csr = critical_sample_ratio(BooleanFunction(5, b));
    CHECK(csr >= 0.0);
    CHECK(csr <= 1.0);
  }
}

TEST_CASE("csr_continuous") {
  const std::vector<std::vector<double>> two = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK(csr_continuous(BitVec::from_string("00"), two, 2.0) == 0.0);
  CHECK(csr_continuous(BitVec::from_string("01"), two, 2.0) == 1.0);
  CHECK(csr_continuous(BitVec::from_string("01"), two, 0.5) == 0.0);
  CHECK_THROWS_AS(csr_continuous(BitVec::from_string("01"), two, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      csr_continuous(BitVec::from_string("01"), {{0.0}, {1.0, 2.0}}, 1.0),
      std::invalid_argument);
}

TEST_CASE("simplicity bound") {
  CHECK(simplicity_bound({1.0, 0.0}, 7.0) == doctest::Approx(0.0078125));
  CHECK(simplicity_bound({0.0, 0.0}, 123.0) == doctest::Approx(1.0));
  CHECK(simplicity_bound({0.5, 10.0}, 100.0) ==
        doctest::Approx(std::exp2(-40.0)));
  CHECK(simplicity_bound({0.1, 5.0}, 0.0) == 1.0);  // clamped
  CHECK_THROWS_AS(simplicity_bound({1.0, 0.0}, -1.0), std::invalid_argument);
}

TEST_CASE("fit_envelope recovers exact lines and ignores dominated points") {
  std::vector<std::pair<double, double>> exact;
  for (int k = 5; k <= 60; k += 5) exact.emplace_back(k, -double(k));
  const BoundParams p1 = fit_envelope(exact);
  CHECK(p1.a == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p1.b == doctest::Approx(0.0).epsilon(1e-6));

  std::vector<std::pair<double, double>> cloud;
  for (int k = 5; k <= 60; k += 5) {
    cloud.emplace_back(k, -0.5 * k + 3.0);
    for (int d = 1; d <= 4; ++d) cloud.emplace_back(k, -0.5 * k + 3.0 - 7.0 * d);
  }
  const BoundParams p2 = fit_envelope(cloud);
  CHECK(p2.a == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p2.b == doctest::Approx(3.0).epsilon(1e-6));

  CHECK_THROWS_AS(fit_envelope({{3.0, -1.0}, {3.2, -2.0}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("fit_envelope on a noisy cloud recovers the slope within 10%") {
  Rng rng(99);
  std::vector<std::pair<double, double>> cloud;
  for (int i = 0; i < 4000; ++i) {
    const double k = 10.0 + 70.0 * rng.u01();
    const double gap = -std::log(rng.u01_open()) * 3.0;  // exp(1/3) below
    cloud.emplace_back(k, -0.5 * k + 3.0 - gap);
  }
  const BoundParams p = fit_envelope(cloud);
  CHECK(p.a == doctest::Approx(0.5).epsilon(0.10));
}

TEST_SUITE_END();
