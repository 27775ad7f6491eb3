// Renders the (m, q) regime map for n = 2 and n = 3 as ASCII art, one
// character per grid point. Legend: B = globally bounded, I = infinite-time
// blow-up only, F = finite-time blow-up, ? = open.

#include <cstdio>

#include "kslab/regime.hpp"

int main() {
  for (int n : {2, 3}) {
    std::printf("n = %d, m in [-1, 1.4] (columns), q in [1.4, -1] (rows)\n", n);
    const auto grid = kslab::scan_region(n, {-1.0, 1.4}, {-1.0, 1.4}, 49);
    for (std::size_t iq = grid.q_values.size(); iq-- > 0;) {
      for (std::size_t im = 0; im < grid.m_values.size(); ++im) {
        char c = '?';
        switch (grid.at(im, iq).regime) {
          case kslab::Regime::GB: c = 'B'; break;
          case kslab::Regime::IFTBU: c = 'I'; break;
          case kslab::Regime::FTBU: c = 'F'; break;
          case kslab::Regime::UNKNOWN: c = '?'; break;
        }
        std::putchar(c);
      }
      std::putchar('\n');
    }
    std::putchar('\n');
  }
  return 0;
}
