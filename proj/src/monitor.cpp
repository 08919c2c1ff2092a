#include "bsqkd/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsqkd/error.hpp"

namespace bsqkd {

void MonitorConfig::validate() const {
  if (!(R >= 0.0 && R <= 1.0)) throw DomainError("monitor: R must lie in [0, 1]");
  if (!(eta_M >= 0.0 && eta_M <= 1.0)) throw DomainError("monitor: eta_M must lie in [0, 1]");
  if (!(d_M >= 0.0 && d_M < 1.0)) throw DomainError("monitor: d_M must lie in [0, 1)");
}

std::string_view to_string(TailClass c) noexcept {
  switch (c) {
    case TailClass::SubPoissonianTail:
      return "sub-poissonian";
    case TailClass::SuperPoissonianTail:
      return "super-poissonian";
    case TailClass::Unclassified:
      break;
  }
  return "unclassified";
}

std::optional<double> try_gamma_n(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                                  std::size_t n) {
  cfg.validate();
  // With k photons sent to the monitor, weight w_k = p_{n+k} C(n+k, n) R^k. Then
  // gamma_n = d_M + (1 - d_M) sum_k w_k (1 - (1 - eta_M)^k) / sum_k w_k, which is the
  // kappa-derivative ratio rearranged so that small gammas keep full relative precision.
  const auto p = dist.probs();
  if (n >= p.size()) return std::nullopt;
  if (cfg.R == 0.0) {
    if (!(p[n] > 0.0)) return std::nullopt;
    return cfg.d_M;
  }
  if (cfg.R >= 1.0 && n > 0) return std::nullopt;  // nothing reaches Bob
  const double log_R = std::log(cfg.R);
  const double log_miss = std::log1p(-cfg.eta_M);
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  std::vector<double> log_w;
  std::vector<std::size_t> ks;
  double peak = -INFINITY;
  for (std::size_t k = 0; n + k < p.size(); ++k) {
    if (!(p[n + k] > 0.0)) continue;
    const double m = static_cast<double>(n + k);
    const double kk = static_cast<double>(k);
    const double lw = std::log(p[n + k]) + std::lgamma(m + 1.0) - lg_n - std::lgamma(kk + 1.0) +
                      kk * log_R;
    log_w.push_back(lw);
    ks.push_back(k);
    peak = std::max(peak, lw);
  }
  if (log_w.empty() || !std::isfinite(peak)) return std::nullopt;
  double sent = 0.0;
  double seen = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    const double w = std::exp(log_w[i] - peak);
    sent += w;
    // 1 - (1 - eta_M)^k, exact zero for k = 0 or a blind monitor.
    if (ks[i] > 0) {
      seen += cfg.eta_M >= 1.0 ? w : w * -std::expm1(static_cast<double>(ks[i]) * log_miss);
    }
  }
  return cfg.d_M + (1.0 - cfg.d_M) * (seen / sent);
}

double gamma_n(const PhotonNumberDistribution& dist, const MonitorConfig& cfg, std::size_t n) {
  auto g = try_gamma_n(dist, cfg, n);
  if (!g) {
    throw DomainError("gamma_n: source never sends " + std::to_string(n) +
                      " photons toward Bob; gamma is undefined");
  }
  return *g;
}

double gamma_n_approx(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                      std::size_t n) {
  if (!(dist[n] > 0.0)) {
    throw DomainError("gamma_n_approx: p_" + std::to_string(n) + " is zero");
  }
  return cfg.R * cfg.eta_M * static_cast<double>(n + 1) * dist[n + 1] / dist[n];
}

PhotonNumberDistribution toward_bob_distribution(const PhotonNumberDistribution& dist,
                                                 const MonitorConfig& cfg) {
  cfg.validate();
  const double T = cfg.transmittance();
  std::vector<double> out(dist.max_photon_number() + 1);
  double t_pow = 1.0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = t_pow * kappa_derivative_scaled(dist, n, cfg.R);
    t_pow *= T;
  }
  return PhotonNumberDistribution::from_weights(out);
}

std::vector<Decrement> decrements(const PhotonNumberDistribution& dist, std::size_t up_to) {
  if (!(dist[1] > 0.0) || !(dist[2] > 0.0)) {
    throw DomainError("decrements: p_1 and p_2 must be positive to anchor the Poissonian");
  }
  const double mu_matched = 2.0 * dist[2] / dist[1];
  std::vector<Decrement> out;
  out.reserve(up_to);
  for (std::size_t n = 1; n <= up_to; ++n) {
    if (!(dist[n] > 0.0) || !(dist[n + 1] > 0.0)) {
      throw DomainError("decrements: zero probability at n=" +
                        std::to_string(dist[n] > 0.0 ? n + 1 : n));
    }
    out.push_back({n, std::log10(dist[n] / dist[n + 1]),
                   std::log10(static_cast<double>(n + 1) / mu_matched)});
  }
  return out;
}

namespace {

// Fills gamma table, Gamma/Upsilon and tail class; sc.rho_sp must be set.
void classify(SourceCharacterization& sc, const PhotonNumberDistribution& full,
              const MonitorConfig& cfg) {
  sc.gamma.assign(sc.n_max + 1, std::nullopt);
  for (std::size_t n = 0; n <= sc.n_max; ++n) sc.gamma[n] = try_gamma_n(sc.rho_sp, cfg, n);
  if (!sc.gamma[0] || !sc.gamma[1]) {
    throw DomainError("characterize: gamma_1 is undefined (the characterized source never "
                      "sends a single photon toward Bob)");
  }
  std::optional<double> hi, lo;
  for (std::size_t n = 2; n <= sc.n_max; ++n) {
    if (sc.gamma[n]) hi = std::max(hi.value_or(*sc.gamma[n]), *sc.gamma[n]);
    const auto g = try_gamma_n(full, cfg, n);
    if (g) lo = std::min(lo.value_or(*g), *g);
  }
  if (!hi) throw DomainError("characterize: no multi-photon gamma_n is defined up to n_max");
  sc.Gamma = *hi;
  sc.Upsilon = lo.value_or(1.0);
  sc.gamma1_full = try_gamma_n(full, cfg, 1).value_or(0.0);

  const double g1 = *sc.gamma[1];
  if (g1 > sc.Gamma * (1.0 + kTailTieTolerance) && g1 - sc.Gamma > 1e-300) {
    sc.tail_class = TailClass::SubPoissonianTail;
  } else if (lo && sc.gamma1_full < sc.Upsilon * (1.0 - kTailTieTolerance)) {
    sc.tail_class = TailClass::SuperPoissonianTail;
  } else {
    sc.tail_class = TailClass::Unclassified;
  }
}

std::optional<double> tail_margin(const PhotonNumberDistribution& dist, std::size_t n_max) {
  if (n_max < 3) return std::nullopt;
  try {
    const auto dec = decrements(dist, n_max - 1);
    double r = dec[1].a - dec[1].b;
    for (std::size_t i = 2; i < dec.size(); ++i) r = std::min(r, dec[i].a - dec[i].b);
    return r;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

SourceCharacterization characterize(const PhotonNumberDistribution& dist, const MonitorConfig& cfg,
                                    std::size_t n_max, const CharacterizeOptions& opts) {
  if (n_max < 2) throw DomainError("characterize: n_max must be at least 2");
  cfg.validate();

  const auto p = dist.probs();
  const std::size_t kept = std::min(n_max + 1, p.size());

  SourceCharacterization sc;
  sc.n_max = n_max;
  sc.Delta = dist.tail_mass(n_max);
  sc.rho_sp = PhotonNumberDistribution::from_weights(p.first(kept));
  classify(sc, dist, cfg);
  sc.margin_r = tail_margin(dist, n_max);

  if (opts.absorb_unwanted) {
    const double g1 = sc.gamma1();
    for (std::size_t n = 2; n <= n_max; ++n) {
      if (sc.gamma[n] && *sc.gamma[n] >= g1) sc.absorbed.push_back(n);
    }
    if (!sc.absorbed.empty()) {
      std::vector<double> weights(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(kept));
      double moved = 0.0;
      for (std::size_t n : sc.absorbed) {
        moved += weights[n];
        weights[n] = 0.0;
      }
      sc.Delta += moved;
      sc.rho_sp = PhotonNumberDistribution::from_weights(weights);
      classify(sc, dist, cfg);
    }
  }
  return sc;
}

SourceCharacterization characterize_full(const PhotonNumberDistribution& dist,
                                         const MonitorConfig& cfg) {
  return characterize(dist, cfg, std::max<std::size_t>(2, dist.max_photon_number()));
}

}  // namespace bsqkd
