#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bsqkd/photon_stats.hpp"

namespace bsqkd {

/// Alice's beam splitter and threshold monitor detector.
struct MonitorConfig {
  double R = 0.5;       ///< reflectance toward the monitor, R = 1 - T
  double eta_M = 0.15;  ///< monitor efficiency
  double d_M = 1e-6;    ///< monitor dark-count probability per pulse

  double transmittance() const noexcept { return 1.0 - R; }
  /// R in {0, 1}: the monitor sees nothing or Bob sees nothing.
  bool degenerate() const noexcept { return R <= 0.0 || R >= 1.0; }
  /// Throws DomainError if a field is out of range.
  void validate() const;
  bool operator==(const MonitorConfig&) const = default;
};

enum class TailClass { SubPoissonianTail, SuperPoissonianTail, Unclassified };

/// Relative gap below which gamma_1 and Gamma (or Upsilon) count as tied. Without it
/// a Poissonian source would be classified by rounding noise.
inline constexpr double kTailTieTolerance = 1e-12;

std::string_view to_string(TailClass c) noexcept;

/// Source split as (1 - Delta) rho_sp + Delta rho_uk, with rho_sp characterized up
/// to n_max photons.
struct SourceCharacterization {
  std::size_t n_max = 0;
  double Delta = 0.0;
  PhotonNumberDistribution rho_sp = PhotonNumberDistribution::fock(0);
  /// gamma_0 ... gamma_{n_max} of rho_sp; empty where rho_sp cannot send n photons to Bob.
  std::vector<std::optional<double>> gamma;
  double Gamma = 0.0;    ///< max over defined gamma_2..gamma_{n_max}
  /// min over defined gamma_2..gamma_{n_max} of the untruncated source. Truncation
  /// pins gamma_{n_max}(rho_sp) at d_M, so rho_sp cannot show a rising tail.
  double Upsilon = 0.0;
  double gamma1_full = 0.0;  ///< gamma_1 of the untruncated source, compared with Upsilon
  TailClass tail_class = TailClass::Unclassified;
  /// min over n in [2, n_max-1] of (a_n - b_n) on the full distribution; empty when
  /// the decrements are not defined there.
  std::optional<double> margin_r;
  /// Photon numbers moved into the uncharacterized part by the absorb option.
  std::vector<std::size_t> absorbed;

  double gamma0() const { return gamma.at(0).value(); }
  double gamma1() const { return gamma.at(1).value(); }
};

struct CharacterizeOptions {
  /// Move every n in [2, n_max] with gamma_n >= gamma_1 into Delta and recompute once.
  bool absorb_unwanted = false;
};

struct Decrement {
  std::size_t n = 0;
  double a = 0.0;  ///< log10(p_n / p_{n+1}) of the source
  double b = 0.0;  ///< same for the Poissonian matched at p_2 / p_1
};

/// Probability that the monitor clicks given n photons travel toward Bob:
/// 1 - (1 - d_M) kappa^(n)(R(1 - eta_M)) / kappa^(n)(R).
/// Throws DomainError when the source never sends n photons toward Bob.
double gamma_n(const PhotonNumberDistribution& dist, const MonitorConfig& cfg, std::size_t n);

/// Same, but empty instead of throwing for unrealizable n.
std::optional<double> try_gamma_n(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                                  std::size_t n);

/// Low-dark-count, steep-tail approximation R eta_M (n+1) p_{n+1} / p_n.
double gamma_n_approx(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                      std::size_t n);

/// Photon-number distribution of the beam-splitter output toward Bob,
/// P_B(n) = T^n kappa^(n)(R) / n!.
PhotonNumberDistribution toward_bob_distribution(const PhotonNumberDistribution& dist,
                                                 const MonitorConfig& cfg);

std::vector<Decrement> decrements(const PhotonNumberDistribution& dist, std::size_t up_to);

/// Truncate at n_max, renormalize, and compute the gamma table, Gamma/Upsilon and the
/// tail class. Throws DomainError if n_max < 2, gamma_1 is undefined, or no gamma_n
/// with n >= 2 is defined.
SourceCharacterization characterize(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                                    std::size_t n_max, const CharacterizeOptions& opts = {});

/// Treat the whole represented support as characterized (Delta = 0).
SourceCharacterization characterize_full(const PhotonNumberDistribution& dist,
                                         const MonitorConfig& cfg);

}  // namespace bsqkd
