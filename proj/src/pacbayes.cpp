#include "pfmap/pacbayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pfmap {

BoundReport realizable_bound(double log_pu, int m, double delta) {
  if (m < 2) throw std::invalid_argument("realizable_bound: m < 2");
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("realizable_bound: delta out of (0,1]");
  if (log_pu > 0.0)
    throw std::invalid_argument("realizable_bound: log_pu > 0");

  BoundReport r;
  r.log_pu = log_pu;
  r.m = m;
  r.delta = delta;
  r.rhs = (-log_pu + std::log(2.0 * m / delta)) / (m - 1);
  r.epsilon_bound = std::min(1.0, -std::expm1(-r.rhs));
  return r;
}

double binary_kl(double q, double p) {
  double s = 0.0;
  if (q > 0.0) s += q * std::log(q / p);
  if (q < 1.0) s += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return s;
}

double invert_kl_bound(const KlBoundQuery& q) {
  if (q.eps_hat < 0.0 || q.eps_hat > 1.0)
    throw std::invalid_argument("invert_kl_bound: eps_hat out of [0,1]");
  if (q.rhs < 0.0) throw std::invalid_argument("invert_kl_bound: rhs < 0");
  if (q.rhs == 0.0) return q.eps_hat;
  if (q.eps_hat >= 1.0) return 1.0;
  if (q.eps_hat == 0.0)  // kl collapses to -ln(1-eps); closed form
    return std::min(-std::expm1(-q.rhs), 1.0 - 1e-15);

  double lo = q.eps_hat;
  double hi = 1.0 - 1e-15;  // kl diverges at eps -> 1
  if (binary_kl(q.eps_hat, hi) <= q.rhs) return hi;
  // bisect until the bracket collapses in floating point
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (binary_kl(q.eps_hat, mid) <= q.rhs)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double posterior_weight(double prior_p, bool consistent, double p_u) {
  if (prior_p < 0.0 || prior_p > 1.0)
    throw std::invalid_argument("posterior_weight: prior_p out of [0,1]");
  if (p_u <= 0.0 || p_u > 1.0)
    throw std::invalid_argument("posterior_weight: p_u out of (0,1]");
  if (!consistent) return 0.0;
  if (prior_p > p_u)
    throw std::invalid_argument(
        "posterior_weight: prior_p > p_u for a consistent concept");
  return prior_p / p_u;
}

}  // namespace pfmap
