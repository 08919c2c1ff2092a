#include "bsqkd/channel.hpp"

#include <cmath>
#include <random>
#include <string>

#include "bsqkd/error.hpp"

namespace bsqkd {

namespace {

// 1 - (1 - p)^n without cancellation for small p.
double at_least_one(double p, double n) {
  if (n == 0.0 || p == 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(n * std::log1p(-p));
}

std::optional<double> ratio_or_empty(double num, double den) {
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

}  // namespace

void ChannelConfig::validate() const {
  if (!(alpha >= 0.0)) throw DomainError("channel: alpha must be nonnegative");
  if (!(e_det >= 0.0 && e_det <= 0.5)) throw DomainError("channel: e_det must lie in [0, 0.5]");
  if (!(eta_B > 0.0 && eta_B <= 1.0)) throw DomainError("channel: eta_B must lie in (0, 1]");
  if (!(d_det >= 0.0 && d_det < 1.0)) throw DomainError("channel: d_det must lie in [0, 1)");
  if (n_det < 1) throw DomainError("channel: n_det must be at least 1");
}

double ChannelConfig::dark_probability() const {
  return at_least_one(d_det, static_cast<double>(n_det));
}

double transmittance(const ChannelConfig& cfg, double l_km) {
  if (!(l_km >= 0.0)) throw DomainError("transmittance: distance must be nonnegative");
  return cfg.eta_B * std::pow(10.0, -cfg.alpha * l_km / 10.0);
}

YieldAndError yield_and_error(const ChannelConfig& cfg, double eta, std::size_t n) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("yield_and_error: eta must lie in [0, 1]");
  const double signal = at_least_one(eta, static_cast<double>(n));
  const double dark = (1.0 - signal) * cfg.dark_probability();
  YieldAndError ye;
  ye.yield = signal + dark;
  const double error_mass = cfg.e_det * signal + 0.5 * dark;
  ye.error = ye.yield > 0.0 ? error_mass / ye.yield : 0.5;
  return ye;
}

ChannelObservables observables(const PhotonNumberDistribution& source, const MonitorConfig& mon,
                               const ChannelConfig& cfg, double l_km) {
  cfg.validate();
  const double eta = transmittance(cfg, l_km);
  const auto to_bob = toward_bob_distribution(source, mon);

  ChannelObservables obs;
  obs.Q_n.assign(to_bob.max_photon_number() + 1, 0.0);
  double err_c = 0.0;
  double err_nc = 0.0;
  for (std::size_t n = 0; n < obs.Q_n.size(); ++n) {
    const auto click = try_gamma_n(source, mon, n);
    if (!click) continue;  // n photons never reach the beam-splitter output
    const auto ye = yield_and_error(cfg, eta, n);
    const double qn = to_bob[n] * ye.yield;
    obs.Q_n[n] = qn;
    obs.Q += qn;
    obs.Q_c += *click * qn;
    err_c += *click * qn * ye.error;
    err_nc += (1.0 - *click) * qn * ye.error;
  }
  obs.Q_nc = obs.Q - obs.Q_c;
  obs.error_mass = err_c + err_nc;
  obs.E_c = ratio_or_empty(err_c, obs.Q_c);
  obs.E_nc = ratio_or_empty(err_nc, obs.Q_nc);
  return obs;
}

ChannelObservables monte_carlo_observables(const PhotonNumberDistribution& source,
                                           const MonitorConfig& mon, const ChannelConfig& cfg,
                                           double l_km, std::uint64_t n_pulses,
                                           std::uint64_t seed) {
  cfg.validate();
  mon.validate();
  if (n_pulses == 0) throw DomainError("monte_carlo_observables: n_pulses must be positive");
  const double eta = transmittance(cfg, l_km);
  const double dark_B = cfg.dark_probability();

  const auto p = source.probs();
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) cdf[m] = (acc += p[m]);
  cdf.back() = 1.0;

  const std::size_t n_top = p.size();
  std::vector<double> monitor_silent(n_top);  // (1 - d_M)(1 - eta_M)^k
  std::vector<double> bob_signal(n_top);      // 1 - (1 - eta)^n
  for (std::size_t k = 0; k < n_top; ++k) {
    monitor_silent[k] = (1.0 - mon.d_M) * std::pow(1.0 - mon.eta_M, static_cast<double>(k));
    bob_signal[k] = at_least_one(eta, static_cast<double>(k));
  }

  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  std::uint64_t det_c = 0, det_nc = 0, err_c = 0, err_nc = 0;
  std::vector<std::uint64_t> det_n(n_top, 0);
  for (std::uint64_t i = 0; i < n_pulses; ++i) {
    const double u_src = uniform();
    std::size_t m = 0;
    while (m + 1 < n_top && u_src >= cdf[m]) ++m;

    std::size_t to_monitor = 0;
    for (std::size_t j = 0; j < m; ++j) to_monitor += uniform() < mon.R ? 1 : 0;
    const std::size_t to_bob = m - to_monitor;

    const bool clicked = uniform() >= monitor_silent[to_monitor];

    bool detected = false;
    bool error = false;
    if (uniform() < bob_signal[to_bob]) {
      detected = true;
      error = uniform() < cfg.e_det;
    } else if (uniform() < dark_B) {
      detected = true;
      error = uniform() < 0.5;
    }
    if (!detected) continue;
    ++det_n[to_bob];
    if (clicked) {
      ++det_c;
      err_c += error ? 1 : 0;
    } else {
      ++det_nc;
      err_nc += error ? 1 : 0;
    }
  }

  const double n = static_cast<double>(n_pulses);
  ChannelObservables obs;
  obs.Q_c = static_cast<double>(det_c) / n;
  obs.Q_nc = static_cast<double>(det_nc) / n;
  obs.Q = static_cast<double>(det_c + det_nc) / n;
  obs.Q_n.resize(n_top);
  for (std::size_t k = 0; k < n_top; ++k) obs.Q_n[k] = static_cast<double>(det_n[k]) / n;
  obs.error_mass = static_cast<double>(err_c + err_nc) / n;
  obs.E_c = ratio_or_empty(static_cast<double>(err_c), static_cast<double>(det_c));
  obs.E_nc = ratio_or_empty(static_cast<double>(err_nc), static_cast<double>(det_nc));
  return obs;
}

}  // namespace bsqkd
