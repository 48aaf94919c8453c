#pragma once

namespace pfmap {

struct BoundReport {
  double log_pu = 0.0;      // natural log of P(U), <= 0
  int m = 0;                // training set size
  double delta = 0.05;
  double rhs = 0.0;         // (ln 1/P(U) + ln(2m/delta)) / (m-1)
  double epsilon_bound = 0.0;
};

struct KlBoundQuery {
  double eps_hat = 0.0;  // empirical error in [0,1]
  double rhs = 0.0;      // (KL(Q||P) + ln(2m/delta)) / (m-1), >= 0
};

// Realizable bound: -ln(1 - eps) <= rhs, i.e. eps <= 1 - exp(-rhs).
BoundReport realizable_bound(double log_pu, int m, double delta);

// Largest eps in [eps_hat, 1) with kl(eps_hat || eps) <= rhs; bisection,
// iterated to floating-point convergence (well below the 1e-10 contract).
double invert_kl_bound(const KlBoundQuery& q);

// Q*(c) = P(c)/P(U) for consistent concepts, 0 otherwise.
double posterior_weight(double prior_p, bool consistent, double p_u);

// binary KL divergence kl(q||p) with the 0 log 0 = 0 convention
double binary_kl(double q, double p);

}  // namespace pfmap
