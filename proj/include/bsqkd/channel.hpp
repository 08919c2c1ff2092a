#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bsqkd/monitor.hpp"
#include "bsqkd/photon_stats.hpp"

namespace bsqkd {

/// Fibre plus Bob's receiver. Defaults are a 0.2 dB/km telecom fibre and a
/// two-detector receiver with 1% apparatus efficiency.
struct ChannelConfig {
  double alpha = 0.2;     ///< fibre loss, dB/km
  double e_det = 0.03;    ///< misalignment error of a signal click
  double eta_B = 0.01;    ///< Bob's apparatus efficiency
  double d_det = 2.5e-9;  ///< dark-count probability per detector per pulse
  int n_det = 2;

  void validate() const;
  /// 1 - (1 - d_det)^n_det
  double dark_probability() const;
  bool operator==(const ChannelConfig&) const = default;
};

struct YieldAndError {
  double yield = 0.0;  ///< Y_n, probability that Bob registers a click
  double error = 0.0;  ///< e_n, error probability of a registered click
};

/// Honest-channel observables at a single distance.
struct ChannelObservables {
  double Q = 0.0;
  double Q_c = 0.0;
  double Q_nc = 0.0;
  /// Empty when the corresponding detection rate is zero (0/0).
  std::optional<double> E_c;
  std::optional<double> E_nc;
  /// Q_n: detection rate from pulses carrying n photons toward Bob.
  std::vector<double> Q_n;
  /// Sum_n Q_n e_n, total erroneous detection mass.
  double error_mass = 0.0;
};

/// eta_B 10^{-alpha l / 10}. Throws DomainError for l < 0.
double transmittance(const ChannelConfig& cfg, double l_km);

YieldAndError yield_and_error(const ChannelConfig& cfg, double eta, std::size_t n);

/// Analytic observables for the full (untruncated) source.
ChannelObservables observables(const PhotonNumberDistribution& source, const MonitorConfig& mon,
                               const ChannelConfig& cfg, double l_km);

/// Per-pulse simulation of the same setup. Deterministic for a given seed; the random
/// stream is a 64-bit Mersenne twister mapped to uniforms by hand so the output does
/// not depend on the standard library's distribution implementations.
ChannelObservables monte_carlo_observables(const PhotonNumberDistribution& source,
                                           const MonitorConfig& mon, const ChannelConfig& cfg,
                                           double l_km, std::uint64_t n_pulses,
                                           std::uint64_t seed);

}  // namespace bsqkd
