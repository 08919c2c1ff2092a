#include <algorithm>
#include <cmath>
#include <limits>

#include "bsqkd/kernels.hpp"

namespace bsqkd::kernels {

namespace {

double entropy(double x) noexcept {
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace

double evaluate(const Chi0Objective& obj, double x) noexcept {
  const double xi = (obj.xi_offset - obj.xi_slope * x) * obj.xi_scale;
  const double vacuum = obj.w_vacuum * x;
  if (!(xi > 0.0)) return vacuum;

  constexpr double inf = std::numeric_limits<double>::infinity();
  const double a =
      obj.use_clicked ? (obj.err_clicked - obj.half_gamma0 * x) * obj.inv_gamma1 / xi : inf;
  const double b = obj.use_nonclicked ? (obj.err_nonclicked - obj.half_one_minus_gamma0 * x) *
                                            obj.inv_one_minus_gamma1 / xi
                                      : inf;
  const double eps = std::min(std::max(std::min(a, b), 0.0), 0.5);
  return vacuum + obj.w_single * xi * (1.0 - entropy(eps));
}

namespace scalar {

void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(obj, xs[i]);
}

void binary_entropy(std::span<const double> x, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = entropy(x[i]);
}

}  // namespace scalar

}  // namespace bsqkd::kernels
