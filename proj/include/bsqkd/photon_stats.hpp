#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bsqkd {

/// Tail mass below which model constructors truncate an infinite distribution.
/// Far below any probability that matters for the key rate, but conditional
/// quantities at moderate n (gamma_n for n ~ 10) depend on the tail relative to
/// p_n, so a cut near 1e-15 would visibly distort them.
inline constexpr double kTruncationTailMass = 1e-300;

/// Diagonal photon-number state: p_0 ... p_N with sum 1.
///
/// Instances are immutable and always normalized; the only way to build one is
/// through `from_weights` or the model constructors below.
class PhotonNumberDistribution {
 public:
  /// Normalizes nonnegative weights. Throws ConstructionError on an empty, all-zero,
  /// negative or non-finite input.
  static PhotonNumberDistribution from_weights(std::span<const double> weights);

  /// Fock state |n>.
  static PhotonNumberDistribution fock(std::size_t n);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t max_photon_number() const noexcept { return probs_.size() - 1; }

  /// p_n, zero beyond the represented support.
  double operator[](std::size_t n) const noexcept { return n < probs_.size() ? probs_[n] : 0.0; }

  /// Sum of p_n for n > n_cut.
  double tail_mass(std::size_t n_cut) const noexcept;

 private:
  explicit PhotonNumberDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

PhotonNumberDistribution make_distribution(std::span<const double> weights);

struct SourceMoments {
  double mu = 0.0;
  /// Undefined (empty) for the vacuum, where mu = 0.
  std::optional<double> g2;
  double p_multi = 0.0;
};

/// Characteristic function sum_n p_n t^n, t in [0,1].
double kappa(const PhotonNumberDistribution& dist, double t);

/// n-th derivative of kappa at t, sum_{m>=n} p_m m!/(m-n)! t^(m-n).
/// Overflows to +inf once n! exceeds the double range (n > 170).
double kappa_derivative(const PhotonNumberDistribution& dist, std::size_t n, double t);

/// kappa^(n)(t) / n!, i.e. sum_{m>=n} p_m C(m,n) t^(m-n). Stays finite for any n
/// and is what the beam-splitter quantities are built from.
double kappa_derivative_scaled(const PhotonNumberDistribution& dist, std::size_t n, double t);

SourceMoments moments(const PhotonNumberDistribution& dist);

/// e^{-mu} mu^n / n!, truncated where the remaining tail drops below kTruncationTailMass.
PhotonNumberDistribution poissonian(double mu);

/// Bose-Einstein distribution mu_bar^n / (1+mu_bar)^{n+1}, truncated likewise.
PhotonNumberDistribution thermal(double mu_bar);

/// Photon number of two independent sources added together.
PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b);

/// Lossy single-photon emitter {p0_sp, p1_sp} with Poissonian background of mean nu.
PhotonNumberDistribution sps_loss_background(double p0_sp, double p1_sp, double nu);

/// Heralded down-conversion-like source: one photon on top of thermal noise.
PhotonNumberDistribution heralded_thermal(double mu_bar);

}  // namespace bsqkd
