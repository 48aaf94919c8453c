#pragma once

#include <cmath>
#include <numbers>

namespace pfmap {

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// log Phi(z), stable far into the left tail
inline double log_norm_cdf(double z) {
  if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // asymptotic expansion: Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - ...)
  const double z2 = z * z;
  const double series =
      1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

// phi(z)/Phi(z) (inverse Mills ratio), stable for z << 0
inline double norm_pdf_over_cdf(double z) {
  if (z > -30.0)
    return std::exp(-0.5 * z * z -
                    0.5 * std::log(2.0 * std::numbers::pi) - log_norm_cdf(z));
  const double z2 = z * z;
  const double series =
      1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -z / series;
}

}  // namespace pfmap
