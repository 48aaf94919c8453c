#pragma once

#include <utility>
#include <vector>

#include "pfmap/bits.hpp"
#include "pfmap/boolfn.hpp"

namespace pfmap {

// LZ76 word count of the exhaustive production history (Kaspar-Schuster
// scan). The final word counts even when it is reproducible from the
// earlier history; that convention is frozen here and in the test oracle.
int lz76_word_count(const BitVec& bits);

// K_LZ: log2(n) for the two uniform strings, otherwise
// log2(n) * (N_w(forward) + N_w(reversed)) / 2.
double lz_complexity(const BitVec& bits);

// Shannon entropy of the 0/1 symbol frequencies, in bits.
double entropy(const BitVec& bits);

// Operation count of the Quine-McCluskey-minimized sum of products.
int boolean_expr_complexity(const BooleanFunction& f);

// Sensitivity measure C1 + C2 over Hamming-1 and Hamming-2 neighborhoods.
double generalization_complexity(const BooleanFunction& f);

// Fraction of inputs with at least one Hamming-1 neighbor of different output.
double critical_sample_ratio(const BooleanFunction& f);

// Continuous-input variant: fraction of points with a differently labeled
// point within Euclidean distance `radius`.
double csr_continuous(const BitVec& labels,
                      const std::vector<std::vector<double>>& inputs,
                      double radius);

struct BoundParams {
  double a = 0.0;  // slope (>= 0 on simplicity-biased data)
  double b = 0.0;  // offset
};

// P <= 2^(-a*k + b), clamped to [0,1].
double simplicity_bound(const BoundParams& p, double k);

// Fit the upper envelope of a (complexity, log2 probability) cloud: bin by
// complexity, keep the best point per bin, least-squares a line through
// those maxima. Returns a = -slope, b = intercept.
BoundParams fit_envelope(
    const std::vector<std::pair<double, double>>& points,
    double bin_width = 1.0);

}  // namespace pfmap
