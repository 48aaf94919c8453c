#include "pfmap/qm.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace pfmap {

namespace {

struct ImplicantKey {
  std::size_t operator()(const Implicant& t) const {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(t.value) << 32) | t.dash);
  }
};

int term_weight(const Implicant& t, int n) {
  const std::uint32_t mask = (n == 32) ? ~0u : ((1u << n) - 1);
  const int literals = n - std::popcount(t.dash & mask);
  const int negated = std::popcount(~t.value & ~t.dash & mask);
  return literals + negated;
}

// All prime implicants via the tabular combining pass.
std::vector<Implicant> prime_implicants(
    const std::vector<std::uint32_t>& minterms) {
  std::vector<Implicant> current;
  current.reserve(minterms.size());
  for (std::uint32_t m : minterms) current.push_back({m, 0});

  std::vector<Implicant> primes;
  while (!current.empty()) {
    std::vector<bool> combined(current.size(), false);
    std::unordered_set<Implicant, ImplicantKey> next_set;

    // bucket by (dash, popcount) so only adjacent groups are compared
    std::vector<std::size_t> order(current.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Implicant &x = current[a], &y = current[b];
      if (x.dash != y.dash) return x.dash < y.dash;
      const int px = std::popcount(x.value), py = std::popcount(y.value);
      if (px != py) return px < py;
      return x.value < y.value;
    });

    for (std::size_t a = 0; a < order.size(); ++a) {
      const Implicant& x = current[order[a]];
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const Implicant& y = current[order[b]];
        if (y.dash != x.dash) break;
        if (std::popcount(y.value) > std::popcount(x.value) + 1) break;
        const std::uint32_t diff = x.value ^ y.value;
        if (std::popcount(diff) == 1) {
          next_set.insert({x.value & ~diff, x.dash | diff});
          combined[order[a]] = combined[order[b]] = true;
        }
      }
    }

    for (std::size_t i = 0; i < current.size(); ++i)
      if (!combined[i]) primes.push_back(current[i]);
    current.assign(next_set.begin(), next_set.end());
  }

  std::sort(primes.begin(), primes.end(), [](const Implicant& a, const Implicant& b) {
    return a.value != b.value ? a.value < b.value : a.dash < b.dash;
  });
  return primes;
}

struct CoverProblem {
  const std::vector<Implicant>* primes;
  std::vector<std::vector<int>> covers_of_minterm;  // candidate PI ids per minterm
  std::vector<std::vector<std::size_t>> minterms_of_prime;
  std::vector<int> weight;
};

// Branch and bound on total term weight (sum of literals + negations per
// term equals op count + 1, so this is exact for the reported measure).
void exact_cover(const CoverProblem& p, std::vector<std::size_t> uncovered,
                 std::vector<int>& chosen, int weight_so_far,
                 std::vector<int>& best, int& best_weight) {
  if (uncovered.empty()) {
    if (weight_so_far < best_weight) {
      best_weight = weight_so_far;
      best = chosen;
    }
    return;
  }
  if (weight_so_far + 1 >= best_weight) return;

  // branch on the minterm with fewest candidates
  std::size_t pick = uncovered[0];
  std::size_t fewest = std::numeric_limits<std::size_t>::max();
  for (std::size_t m : uncovered) {
    const std::size_t c = p.covers_of_minterm[m].size();
    if (c < fewest) {
      fewest = c;
      pick = m;
    }
  }

  for (int pi : p.covers_of_minterm[pick]) {
    const int w = weight_so_far + p.weight[pi];
    if (w >= best_weight) continue;
    std::vector<std::size_t> rest;
    rest.reserve(uncovered.size());
    for (std::size_t m : uncovered) {
      bool hit = false;
      for (std::size_t mm : p.minterms_of_prime[pi])
        if (mm == m) {
          hit = true;
          break;
        }
      if (!hit) rest.push_back(m);
    }
    chosen.push_back(pi);
    exact_cover(p, std::move(rest), chosen, w, best, best_weight);
    chosen.pop_back();
  }
}

}  // namespace

int SopExpr::op_count() const {
  if (terms.empty()) return 0;
  const std::uint32_t mask = (n_vars == 32) ? ~0u : ((1u << n_vars) - 1);
  int ands = 0, nots = 0;
  for (const Implicant& t : terms) {
    const int literals = n_vars - std::popcount(t.dash & mask);
    ands += std::max(literals - 1, 0);
    nots += std::popcount(~t.value & ~t.dash & mask);
  }
  const int ors = std::max(static_cast<int>(terms.size()) - 1, 0);
  return ands + ors + nots;
}

std::string SopExpr::to_string() const {
  if (terms.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) s += " | ";
    const Implicant& t = terms[i];
    bool any = false;
    for (int j = 0; j < n_vars; ++j) {
      const int bit = n_vars - 1 - j;  // variable j <-> index bit n-1-j
      if ((t.dash >> bit) & 1u) continue;
      if (any) s += "&";
      if (!((t.value >> bit) & 1u)) s += "!";
      s += "x" + std::to_string(j);
      any = true;
    }
    if (!any) s += "1";
  }
  return s;
}

SopExpr minimize_sop(const BooleanFunction& f) {
  const int n = f.n_inputs;
  if (n > 12)
    throw std::invalid_argument("minimize_sop: n > 12 not supported");

  const std::size_t size = f.table_size();
  std::vector<std::uint32_t> minterms;
  for (std::size_t i = 0; i < size; ++i)
    if (f.bits.get(i)) minterms.push_back(static_cast<std::uint32_t>(i));

  SopExpr expr;
  expr.n_vars = n;
  if (minterms.empty()) return expr;  // constant 0
  if (minterms.size() == size) {      // constant 1
    expr.terms.push_back({0, (n == 32) ? ~0u : ((1u << n) - 1)});
    return expr;
  }

  const std::vector<Implicant> primes = prime_implicants(minterms);

  CoverProblem p;
  p.primes = &primes;
  p.weight.resize(primes.size());
  p.minterms_of_prime.resize(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i)
    p.weight[i] = term_weight(primes[i], n);

  std::vector<std::size_t> uncovered;
  std::vector<int> chosen;

  // essential prime implicants first
  std::vector<bool> covered(minterms.size(), false);
  std::vector<bool> selected(primes.size(), false);
  for (std::size_t m = 0; m < minterms.size(); ++m) {
    int only = -1, count = 0;
    for (std::size_t i = 0; i < primes.size(); ++i)
      if (primes[i].covers(minterms[m])) {
        only = static_cast<int>(i);
        if (++count > 1) break;
      }
    if (count == 1 && !selected[only]) {
      selected[only] = true;
      chosen.push_back(only);
    }
  }
  for (std::size_t m = 0; m < minterms.size(); ++m)
    for (int pi : chosen)
      if (primes[pi].covers(minterms[m])) {
        covered[m] = true;
        break;
      }
  for (std::size_t m = 0; m < minterms.size(); ++m)
    if (!covered[m]) uncovered.push_back(m);

  if (!uncovered.empty()) {
    for (std::size_t m : uncovered) {
      std::vector<int> cands;
      for (std::size_t i = 0; i < primes.size(); ++i)
        if (!selected[i] && primes[i].covers(minterms[m]))
          cands.push_back(static_cast<int>(i));
      p.covers_of_minterm.resize(minterms.size());
      p.covers_of_minterm[m] = std::move(cands);
    }
    for (std::size_t i = 0; i < primes.size(); ++i)
      for (std::size_t m : uncovered)
        if (primes[i].covers(minterms[m])) p.minterms_of_prime[i].push_back(m);

    if (n <= 6) {
      std::vector<int> best;
      int best_weight = std::numeric_limits<int>::max();
      std::vector<int> scratch;
      exact_cover(p, uncovered, scratch, 0, best, best_weight);
      for (int pi : best) chosen.push_back(pi);
    } else {
      expr.greedy_cover = true;
      std::vector<bool> open(minterms.size(), false);
      for (std::size_t m : uncovered) open[m] = true;
      std::size_t remaining = uncovered.size();
      while (remaining > 0) {
        int best_pi = -1;
        std::size_t best_gain = 0;
        for (std::size_t i = 0; i < primes.size(); ++i) {
          if (selected[i]) continue;
          std::size_t gain = 0;
          for (std::size_t m : p.minterms_of_prime[i])
            if (open[m]) ++gain;
          if (gain > best_gain ||
              (gain == best_gain && gain > 0 && best_pi >= 0 &&
               p.weight[i] < p.weight[best_pi])) {
            best_gain = gain;
            best_pi = static_cast<int>(i);
          }
        }
        selected[best_pi] = true;
        chosen.push_back(best_pi);
        for (std::size_t m : p.minterms_of_prime[best_pi])
          if (open[m]) {
            open[m] = false;
            --remaining;
          }
      }
    }
  }

  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  for (int pi : chosen) expr.terms.push_back(primes[pi]);
  std::sort(expr.terms.begin(), expr.terms.end(),
            [](const Implicant& a, const Implicant& b) {
              return a.value != b.value ? a.value < b.value : a.dash < b.dash;
            });
  return expr;
}

}  // namespace pfmap
