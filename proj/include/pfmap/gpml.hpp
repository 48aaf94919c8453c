#pragma once

#include <cstdint>

#include "pfmap/bits.hpp"
#include "pfmap/nngp.hpp"

namespace pfmap {

enum class MlMethod { ep, laplace, mc };

struct MarginalLikelihood {
  double log_pu = 0.0;  // natural log of P(U), <= 0
  MlMethod method = MlMethod::ep;
  int iterations = 0;
  bool converged = false;
  double mc_stderr = 0.0;  // mc only: standard error of log_pu
};

// Expectation propagation for GP binary classification with a probit
// likelihood Phi(t_i f_i), t_i = 2*labels_i - 1. Site sweeps run in fixed
// ascending order until the largest site natural-parameter change drops
// below 1e-4 (at most 100 sweeps).
MarginalLikelihood log_ml_ep(const KernelMatrix& km, const BitVec& labels);

// Laplace approximation at the probit posterior mode (Newton iteration,
// objective tolerance 1e-8, at most 100 steps).
MarginalLikelihood log_ml_laplace(const KernelMatrix& km, const BitVec& labels);

// Brute-force oracle: fraction of N(0,K) draws whose sign pattern matches
// the labels (y > 0 maps to 1). Only viable for small m. Zero hits leaves
// converged = false with log_pu = -inf.
MarginalLikelihood log_ml_mc(const KernelMatrix& km, const BitVec& labels,
                             std::uint64_t n_draws, std::uint64_t seed,
                             int workers = 1);

}  // namespace pfmap
