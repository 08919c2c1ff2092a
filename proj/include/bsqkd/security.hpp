#pragma once

#include <cstddef>
#include <optional>

#include "bsqkd/channel.hpp"
#include "bsqkd/monitor.hpp"
#include "bsqkd/photon_stats.hpp"

namespace bsqkd {

/// Protocol constants plus the source characterization the bounds depend on.
struct SecurityParams {
  double q = 0.5;  ///< sifting efficiency, 1/2 for BB84
  double f = 1.2;  ///< error-correction inefficiency
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double Gamma = 0.0;
  double Delta = 0.0;

  static SecurityParams from(const SourceCharacterization& sc, double q = 0.5, double f = 1.2);

  /// Throws PreconditionError unless q in (0,1], f >= 1, 0 <= Gamma < gamma1 <= 1,
  /// gamma0 in [0,1] and Delta in [0,1).
  void validate() const;
};

struct MinimizerOptions {
  std::size_t grid_points = 2001;
  double rel_tol = 1e-6;
};

/// One of the three privacy-amplification groupings.
struct BranchRate {
  /// Signed rate per pulse; -inf when the branch's error rate is undefined.
  double rate = 0.0;
  std::optional<double> chi0_star;
  std::optional<double> xi_at_star;
  /// Clamped single-photon error bound at the minimizer; empty without credit.
  std::optional<double> eps_at_star;
};

struct KeyRateResult {
  BranchRate clicked;
  BranchRate nonclicked;
  BranchRate both;
  double chi0_max = 0.0;
  double G = 0.0;  ///< max(both, clicked, nonclicked, 0)

  double G_c() const noexcept { return clicked.rate; }
  double G_nc() const noexcept { return nonclicked.rate; }
  double G_both() const noexcept { return both.rate; }
};

/// -x log2 x - (1-x) log2(1-x); throws DomainError outside [0, 1].
double binary_entropy(double x);

/// Lower bound on the single-photon detection rate from the sp source,
/// [Q_c - Gamma Q - (1 - Gamma) Delta - (gamma0 - Gamma) chi0] / (gamma1 - Gamma).
double xi(double chi0, const ChannelObservables& obs, const SecurityParams& sp);

/// Upper bound on the single-photon error rate before clamping, or empty when
/// xi(chi0) <= 0 (no single-photon credit).
std::optional<double> epsilon(double chi0, const ChannelObservables& obs, const SecurityParams& sp);

/// Largest vacuum contribution compatible with a nonnegative error bound, capped by Q.
double chi0_upper_limit(const ChannelObservables& obs, const SecurityParams& sp);

/// Clicked, non-clicked and jointly amplified rates minimized over the vacuum
/// contribution chi0 (Eve's worst case), and their clamped maximum.
KeyRateResult key_rates(const ChannelObservables& obs, const SecurityParams& sp,
                        const MinimizerOptions& opts = {});

/// Error-free closed form G/q = xi(0). Throws PreconditionError if an observed error
/// rate is nonzero.
double ideal_case_rate(const ChannelObservables& obs, const SecurityParams& sp);

/// Q - p_multi, the no-error rule of thumb without monitoring (signed).
double baseline_conventional(const ChannelObservables& obs, const SourceMoments& m);

/// GLLP rate of a perfect single-photon source without monitor (signed).
double baseline_ideal_sps(const ChannelConfig& cfg, const SecurityParams& sp, double l_km);

/// Q - Delta / (gamma1 - Gamma), clamped at 0.
double sub_poissonian_rule_of_thumb(const ChannelObservables& obs,
                                    const SourceCharacterization& sc);

/// Q - Delta / (1 - gamma1 / Upsilon), clamped at 0.
double super_poissonian_rule_of_thumb(const ChannelObservables& obs,
                                      const SourceCharacterization& sc);

/// Unclamped value of the super-Poissonian rule of thumb.
double super_poissonian_rule_of_thumb_signed(const ChannelObservables& obs,
                                             const SourceCharacterization& sc);

/// g2 at which a conventional setup with mean photon number mu breaks even
/// (Q = mu^2 g2 / 2) at distance l, Q taken as mu times the single-photon yield.
double required_g2_for_distance(const ChannelConfig& cfg, double mu, double l_km);

}  // namespace bsqkd
