#include "pfmap/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace pfmap {
namespace {

// Ziggurat tables for the standard normal (Marsaglia & Tsang 2000).
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128];
  double fn[128];

  ZigguratTables() {
    const double m1 = 2147483648.0;  // 2^31
    double dn = 3.442619855899;
    double tn = dn;
    const double vn = 9.91256303526217e-3;

    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

const ZigguratTables zig;

constexpr double kZigR = 3.442619855899;

}  // namespace

double Rng::normal() {
  const std::int32_t hz = static_cast<std::int32_t>(next_u64() >> 32);
  const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
  const std::uint32_t az =
      hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
             : static_cast<std::uint32_t>(hz);
  if (az < zig.kn[iz]) return hz * zig.wn[iz];
  return normal_fix(hz, iz);
}

double Rng::normal_fix(std::int32_t hz, std::uint32_t iz) {
  for (;;) {
    double x = hz * zig.wn[iz];
    if (iz == 0) {
      // tail beyond R: exponential rejection (Marsaglia 1964)
      double y;
      do {
        x = -std::log(u01_open()) / kZigR;
        y = -std::log(u01_open());
      } while (y + y < x * x);
      return hz > 0 ? kZigR + x : -kZigR - x;
    }
    if (zig.fn[iz] + u01_open() * (zig.fn[iz - 1] - zig.fn[iz]) <
        std::exp(-0.5 * x * x))
      return x;
    hz = static_cast<std::int32_t>(next_u64() >> 32);
    iz = static_cast<std::uint32_t>(hz) & 127u;
    const std::uint32_t az =
        hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
               : static_cast<std::uint32_t>(hz);
    if (az < zig.kn[iz]) return hz * zig.wn[iz];
  }
}

}  // namespace pfmap
