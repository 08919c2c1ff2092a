#pragma once

// Data-parallel inner loops of the key-rate minimization. Every kernel has a
// scalar reference implementation; vector variants are selected at runtime
// from what the CPU supports and are tested against the reference.

#include <span>
#include <string_view>

namespace bsqkd::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Whether this build contains the variant and the running CPU can execute it.
bool isa_supported(Isa isa) noexcept;

/// Best supported variant.
Isa detected_isa() noexcept;

/// Variant used by the dispatched entry points. Defaults to detected_isa(); the
/// BSQKD_ISA environment variable ("scalar" or "avx2") overrides it at startup.
Isa active_isa() noexcept;

/// Throws std::invalid_argument if `isa` is not supported.
void set_active_isa(Isa isa);

/// Coefficients of the chi0 objective
///
///   w_vacuum * x + w_single * xi+(x) * (1 - H2(clamp(eps(x), 0, 1/2)))
///
/// with xi(x) = (xi_offset - xi_slope * x) * xi_scale and
/// eps(x) = min over enabled branches of (err - half_weight * x) * inv_weight / xi(x).
/// The single-photon term is dropped where xi(x) <= 0.
struct Chi0Objective {
  double xi_offset = 0.0;
  double xi_slope = 0.0;
  double xi_scale = 1.0;

  bool use_clicked = true;
  double err_clicked = 0.0;          // Q_c E_c
  double half_gamma0 = 0.0;          // gamma0 / 2
  double inv_gamma1 = 0.0;           // 1 / gamma1

  bool use_nonclicked = true;
  double err_nonclicked = 0.0;       // Q_nc E_nc
  double half_one_minus_gamma0 = 0.0;
  double inv_one_minus_gamma1 = 0.0;

  double w_vacuum = 1.0;
  double w_single = 1.0;
};

/// Single-point reference evaluation.
double evaluate(const Chi0Objective& obj, double x) noexcept;

/// out[i] = objective(xs[i]); spans must have equal length.
void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out);

/// out[i] = H2(x[i]) for x[i] in [0, 1]; values at or outside the endpoints give 0.
void binary_entropy(std::span<const double> x, std::span<double> out);

namespace scalar {
void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out) noexcept;
void binary_entropy(std::span<const double> x, std::span<double> out) noexcept;
}  // namespace scalar

#if defined(BSQKD_HAVE_AVX2)
namespace avx2 {
// Arguments below 2^-1000 contribute 0 to the entropy (the exact value is < 1e-297).
void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out) noexcept;
void binary_entropy(std::span<const double> x, std::span<double> out) noexcept;
}  // namespace avx2
#endif

}  // namespace bsqkd::kernels
