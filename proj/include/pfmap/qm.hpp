#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfmap/boolfn.hpp"

namespace pfmap {

// Product term over n variables. Variable j (j = 0 is the function's
// first input) corresponds to index bit n-1-j; a set dash bit means the
// variable is absent from the term.
struct Implicant {
  std::uint32_t value = 0;
  std::uint32_t dash = 0;

  bool covers(std::uint32_t minterm) const {
    return (minterm & ~dash) == value;
  }
  bool operator==(const Implicant&) const = default;
};

// Sum-of-products form. No terms means constant 0; a term with every
// variable dashed covers everything (constant 1).
struct SopExpr {
  int n_vars = 0;
  std::vector<Implicant> terms;
  bool greedy_cover = false;  // set when the cover step was not exact

  int evaluate(std::uint32_t x) const {
    for (const Implicant& t : terms)
      if (t.covers(x)) return 1;
    return 0;
  }

  // Operation count: per term max(L-1, 0) ANDs, max(T-1, 0) ORs, one NOT
  // per negated literal; constants and bare literals cost 0.
  int op_count() const;

  std::string to_string() const;  // e.g. "x0&!x2 | x1"
};

// Quine-McCluskey minimization: prime implicants, essential selection,
// then exact branch-and-bound cover for n <= 6 and greedy cover above.
// Requires 1 <= n <= 12.
SopExpr minimize_sop(const BooleanFunction& f);

}  // namespace pfmap
