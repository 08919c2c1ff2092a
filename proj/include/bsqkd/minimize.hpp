#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bsqkd {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

/// n >= 2 evenly spaced points covering [lo, hi], endpoints exact.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> xs(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + step * static_cast<double>(i);
  xs.back() = hi;
  return xs;
}

/// Golden-section search for a minimum of f on [lo, hi]. Stops once the bracket is
/// narrower than rel_tol times its initial width. Returns the best point evaluated,
/// so on non-unimodal input the result is still never worse than the endpoints.
template <class F>
ScalarMinimum golden_section_minimize(F&& f, double lo, double hi, double rel_tol = 1e-6,
                                      int max_iter = 200) {
  if (!(hi >= lo)) throw std::invalid_argument("golden_section_minimize: empty interval");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double target = rel_tol * (hi - lo);

  ScalarMinimum best{lo, f(lo)};
  auto consider = [&best](double x, double v) {
    if (v < best.value) best = {x, v};
  };
  consider(hi, f(hi));
  if (hi == lo) return best;

  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  consider(c, fc);
  consider(d, fd);
  for (int it = 0; it < max_iter && (hi - lo) > target; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
      consider(c, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

}  // namespace bsqkd
