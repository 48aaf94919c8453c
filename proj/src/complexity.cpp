#include "pfmap/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pfmap/qm.hpp"

namespace pfmap {

int lz76_word_count(const BitVec& s) {
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("lz76_word_count: empty input");
  if (n == 1) return 1;

  std::size_t i = 0, k = 1, l = 1, k_max = 1;
  int c = 1;
  for (;;) {
    if (s.get(i + k - 1) == s.get(l + k - 1)) {
      ++k;
      if (l + k > n) {
        ++c;  // trailing word, counted even though reproducible
        break;
      }
    } else {
      k_max = std::max(k, k_max);
      ++i;
      if (i == l) {
        ++c;
        l += k_max;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        k_max = 1;
      } else {
        k = 1;
      }
    }
  }
  return c;
}

double lz_complexity(const BitVec& bits) {
  const std::size_t n = bits.size();
  if (n == 0) throw std::invalid_argument("lz_complexity: empty input");
  const std::size_t ones = bits.count_ones();
  if (ones == 0 || ones == n) return std::log2(static_cast<double>(n));
  const int fwd = lz76_word_count(bits);
  const int rev = lz76_word_count(bits.reversed());
  return std::log2(static_cast<double>(n)) * (fwd + rev) / 2.0;
}

double entropy(const BitVec& bits) {
  const std::size_t n = bits.size();
  if (n == 0) throw std::invalid_argument("entropy: empty input");
  const double p1 = static_cast<double>(bits.count_ones()) / n;
  const double p0 = 1.0 - p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log2(p0);
  if (p1 > 0.0) h -= p1 * std::log2(p1);
  return h;
}

int boolean_expr_complexity(const BooleanFunction& f) {
  if (f.n_inputs > 12)
    throw std::invalid_argument("boolean_expr_complexity: n > 12");
  return minimize_sop(f).op_count();
}

double generalization_complexity(const BooleanFunction& f) {
  const int n = f.n_inputs;
  if (n < 2)
    throw std::invalid_argument("generalization_complexity: requires n >= 2");
  const std::size_t size = f.table_size();

  std::uint64_t changes1 = 0, changes2 = 0;
  for (std::size_t x = 0; x < size; ++x) {
    const int fx = f.bits.get(x);
    for (int i = 0; i < n; ++i) {
      if (f.bits.get(x ^ (std::size_t{1} << i)) != fx) ++changes1;
      for (int j = i + 1; j < n; ++j) {
        const std::size_t y = x ^ (std::size_t{1} << i) ^ (std::size_t{1} << j);
        if (f.bits.get(y) != fx) ++changes2;
      }
    }
  }
  const double c1 =
      static_cast<double>(changes1) / (static_cast<double>(size) * n);
  const double c2 = 2.0 * static_cast<double>(changes2) /
                    (static_cast<double>(size) * n * (n - 1));
  return c1 + c2;
}

double critical_sample_ratio(const BooleanFunction& f) {
  const int n = f.n_inputs;
  const std::size_t size = f.table_size();
  std::size_t critical = 0;
  for (std::size_t x = 0; x < size; ++x) {
    const int fx = f.bits.get(x);
    for (int i = 0; i < n; ++i) {
      if (f.bits.get(x ^ (std::size_t{1} << i)) != fx) {
        ++critical;
        break;
      }
    }
  }
  return static_cast<double>(critical) / static_cast<double>(size);
}

double csr_continuous(const BitVec& labels,
                      const std::vector<std::vector<double>>& inputs,
                      double radius) {
  const std::size_t m = inputs.size();
  if (labels.size() != m)
    throw std::invalid_argument("csr_continuous: |labels| != |inputs|");
  if (radius <= 0.0) throw std::invalid_argument("csr_continuous: radius <= 0");
  if (m == 0) return 0.0;
  const std::size_t dim = inputs[0].size();
  for (const auto& v : inputs)
    if (v.size() != dim)
      throw std::invalid_argument("csr_continuous: ragged input dimensions");

  const double r2 = radius * radius;
  std::size_t critical = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i || labels.get(j) == labels.get(i)) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = inputs[i][k] - inputs[j][k];
        d2 += d * d;
      }
      if (d2 <= r2) {
        ++critical;
        break;
      }
    }
  }
  return static_cast<double>(critical) / static_cast<double>(m);
}

double simplicity_bound(const BoundParams& p, double k) {
  if (k < 0.0) throw std::invalid_argument("simplicity_bound: k < 0");
  const double v = std::exp2(-p.a * k + p.b);
  return std::clamp(v, 0.0, 1.0);
}

BoundParams fit_envelope(const std::vector<std::pair<double, double>>& points,
                         double bin_width) {
  if (bin_width <= 0.0) throw std::invalid_argument("fit_envelope: bin_width");

  // per bin, the (complexity, log2 p) of the highest-probability point
  std::map<long long, std::pair<double, double>> best;
  for (const auto& [k, lp] : points) {
    const long long bin = static_cast<long long>(std::floor(k / bin_width));
    auto it = best.find(bin);
    if (it == best.end() || lp > it->second.second) best[bin] = {k, lp};
  }
  if (best.size() < 2)
    throw std::invalid_argument(
        "fit_envelope: need points in at least two complexity bins");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(best.size());
  for (const auto& [bin, pt] : best) {
    sx += pt.first;
    sy += pt.second;
    sxx += pt.first * pt.first;
    sxy += pt.first * pt.second;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("fit_envelope: degenerate complexity spread");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  return BoundParams{-slope, intercept};
}

}  // namespace pfmap
