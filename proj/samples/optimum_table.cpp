// Prints Q_opt, I_opt and the asymptotic capacity over E for a few basis angles.
#include <algorithm>
#include <cstdio>

#include "qkdprobe/qkdprobe.hpp"

using namespace qkdprobe;

int main() {
  std::printf("%-8s %-6s %-10s %-10s %-10s\n", "alpha/pi", "E", "Q_opt", "I_opt", "capacity");
  for (double frac : {1.0 / 12.0, 1.0 / 9.0, 1.0 / 8.0, 1.0 / 5.0}) {
    const SignalGeometry g(frac * pi);
    for (double E = 0.0; E <= std::min(0.2, max_error_rate(g)) + 1e-12; E += 0.05) {
      const auto o = optimal_overlap(E, g);
      const auto c = asymptotic_capacity(E, g);
      std::printf("%-8.4f %-6.2f %-10.6f %-10.6f %-10.6f\n", frac, E, o.overlap, o.renyi_bits,
                  c.capacity);
    }
  }
  const auto g = SignalGeometry::standard();
  std::printf("capacity vanishes at E = %.8f for alpha = pi/8\n", capacity_zero_crossing(g));
}
