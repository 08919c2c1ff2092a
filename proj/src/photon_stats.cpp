#include "bsqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bsqkd/error.hpp"

namespace bsqkd {

namespace {

void check_unit_interval(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError(std::string(what) + ": argument t=" + std::to_string(t) +
                      " outside [0, 1]");
  }
}

// Horner evaluation of sum_j coeff[j] t^j.
double horner(std::span<const double> coeff, double t) {
  double acc = 0.0;
  for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) acc = acc * t + *it;
  return acc;
}

// Coefficients p_m * w(m, n) for m = n..N, where w(n, n) = lead and
// w(m+1, n) = w(m, n) * (m+1) / (m+1-n). lead = n! gives falling factorials,
// lead = 1 gives binomial coefficients.
std::vector<double> shifted_coefficients(std::span<const double> p, std::size_t n, double lead) {
  std::vector<double> coeff;
  coeff.reserve(p.size() - n);
  double w = lead;
  for (std::size_t m = n; m < p.size(); ++m) {
    if (m > n) w *= static_cast<double>(m) / static_cast<double>(m - n);
    coeff.push_back(p[m] * w);
  }
  return coeff;
}

// sum_{m>=n} p_m C(m,n) t^(m-n) term by term in the log domain, for supports wide
// enough that C(m,n) alone overflows.
double scaled_derivative_logsum(std::span<const double> p, std::size_t n, double t) {
  if (t == 0.0) return p[n];
  const double log_t = std::log(t);
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  double s = 0.0;
  for (std::size_t m = n; m < p.size(); ++m) {
    if (!(p[m] > 0.0)) continue;
    const double mm = static_cast<double>(m);
    s += std::exp(std::log(p[m]) + std::lgamma(mm + 1.0) - lg_n -
                  std::lgamma(mm - static_cast<double>(n) + 1.0) +
                  static_cast<double>(m - n) * log_t);
  }
  return s;
}

}  // namespace

PhotonNumberDistribution PhotonNumberDistribution::from_weights(std::span<const double> weights) {
  if (weights.empty()) throw ConstructionError("photon-number distribution: no entries");
  double total = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) {
    const double w = weights[n];
    if (!std::isfinite(w)) {
      throw ConstructionError("photon-number distribution: non-finite entry at n=" +
                              std::to_string(n));
    }
    if (w < 0.0) {
      throw ConstructionError("photon-number distribution: negative entry at n=" +
                              std::to_string(n));
    }
    total += w;
  }
  if (!(total > 0.0)) throw ConstructionError("photon-number distribution: all entries are zero");

  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return PhotonNumberDistribution(std::move(probs));
}

PhotonNumberDistribution PhotonNumberDistribution::fock(std::size_t n) {
  std::vector<double> probs(n + 1, 0.0);
  probs[n] = 1.0;
  return PhotonNumberDistribution(std::move(probs));
}

double PhotonNumberDistribution::tail_mass(std::size_t n_cut) const noexcept {
  if (n_cut + 1 >= probs_.size()) return 0.0;
  // Small terms first.
  double s = 0.0;
  for (std::size_t n = probs_.size() - 1; n > n_cut; --n) s += probs_[n];
  return s;
}

PhotonNumberDistribution make_distribution(std::span<const double> weights) {
  return PhotonNumberDistribution::from_weights(weights);
}

double kappa(const PhotonNumberDistribution& dist, double t) {
  return kappa_derivative(dist, 0, t);
}

double kappa_derivative(const PhotonNumberDistribution& dist, std::size_t n, double t) {
  check_unit_interval(t, "kappa");
  const auto p = dist.probs();
  if (n >= p.size()) return 0.0;
  double n_factorial = 1.0;
  for (std::size_t k = 2; k <= n; ++k) n_factorial *= static_cast<double>(k);
  return horner(shifted_coefficients(p, n, n_factorial), t);
}

double kappa_derivative_scaled(const PhotonNumberDistribution& dist, std::size_t n, double t) {
  check_unit_interval(t, "kappa");
  const auto p = dist.probs();
  if (n >= p.size()) return 0.0;
  const auto coeff = shifted_coefficients(p, n, 1.0);
  if (!std::all_of(coeff.begin(), coeff.end(), [](double c) { return std::isfinite(c); })) {
    return scaled_derivative_logsum(p, n, t);
  }
  return horner(coeff, t);
}

SourceMoments moments(const PhotonNumberDistribution& dist) {
  const auto p = dist.probs();
  double mu = 0.0;
  double factorial2 = 0.0;
  for (std::size_t n = 1; n < p.size(); ++n) {
    const double nn = static_cast<double>(n);
    mu += nn * p[n];
    factorial2 += nn * (nn - 1.0) * p[n];
  }
  SourceMoments m;
  m.mu = mu;
  if (mu > 0.0) m.g2 = factorial2 / (mu * mu);
  m.p_multi = std::max(0.0, 1.0 - dist[0] - dist[1]);
  return m;
}

PhotonNumberDistribution poissonian(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DomainError("poissonian: mean must be positive and finite");
  }
  const double log_mu = std::log(mu);
  std::vector<double> probs;
  for (std::size_t n = 0;; ++n) {
    const double nn = static_cast<double>(n);
    probs.push_back(std::exp(-mu + nn * log_mu - std::lgamma(nn + 1.0)));
    // Past the mode the tail beyond n is bounded by a geometric series with
    // ratio mu/(n+2).
    if (nn + 2.0 > mu) {
      const double next = probs.back() * mu / (nn + 1.0);
      const double bound = next / (1.0 - mu / (nn + 2.0));
      if (bound < kTruncationTailMass) break;
    }
  }
  return PhotonNumberDistribution::from_weights(probs);
}

PhotonNumberDistribution thermal(double mu_bar) {
  if (!(mu_bar > 0.0) || !std::isfinite(mu_bar)) {
    throw DomainError("thermal: mean must be positive and finite");
  }
  const double ratio = mu_bar / (1.0 + mu_bar);
  std::vector<double> probs;
  double p = 1.0 / (1.0 + mu_bar);
  double tail = ratio;  // mass beyond n = ratio^(n+1)
  for (;;) {
    probs.push_back(p);
    if (tail < kTruncationTailMass) break;
    p *= ratio;
    tail *= ratio;
  }
  return PhotonNumberDistribution::from_weights(probs);
}

PhotonNumberDistribution convolve(const PhotonNumberDistribution& a,
                                  const PhotonNumberDistribution& b) {
  const auto pa = a.probs();
  const auto pb = b.probs();
  std::vector<double> out(pa.size() + pb.size() - 1, 0.0);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pb.size(); ++j) out[i + j] += pa[i] * pb[j];
  }
  return PhotonNumberDistribution::from_weights(out);
}

PhotonNumberDistribution sps_loss_background(double p0_sp, double p1_sp, double nu) {
  if (!(p0_sp >= 0.0) || !(p1_sp >= 0.0) || std::abs(p0_sp + p1_sp - 1.0) > 1e-12) {
    throw DomainError("sps_loss_background: emitter weights must be nonnegative and sum to 1");
  }
  const double emitter[] = {p0_sp, p1_sp};
  return convolve(PhotonNumberDistribution::from_weights(emitter), poissonian(nu));
}

PhotonNumberDistribution heralded_thermal(double mu_bar) {
  return convolve(PhotonNumberDistribution::fock(1), thermal(mu_bar));
}

}  // namespace bsqkd
