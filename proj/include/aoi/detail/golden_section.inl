#pragma once

#include <cmath>

namespace aoi::sweep {

template <typename F>
LineMinimum golden_section(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  LineMinimum best{c, fc, 2};
  if (fd < best.fx) best = {d, fd, 2};

  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      if (fc < best.fx) best.x = c, best.fx = fc;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      if (fd < best.fx) best.x = d, best.fx = fd;
    }
    ++best.evaluations;
  }
  return best;
}

}  // namespace aoi::sweep
