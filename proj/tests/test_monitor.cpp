#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bsqkd/error.hpp"
#include "bsqkd/monitor.hpp"
#include "oracles.hpp"

namespace bsqkd {
namespace {

std::vector<double> as_vector(const PhotonNumberDistribution& d) {
  return {d.probs().begin(), d.probs().end()};
}

const MonitorConfig kReferenceMonitor{0.5, 0.15, 1e-6};

TEST(GammaN, PoissonianIsFlat) {
  const MonitorConfig cfg{0.5, 0.15, 0.0};
  const auto pois = poissonian(1.0);
  for (std::size_t n = 0; n <= 10; ++n) {
    EXPECT_NEAR(gamma_n(pois, cfg, n), 0.0722565136714471, 1e-12) << n;
  }
}

TEST(GammaN, IdealSinglePhoton) {
  const MonitorConfig cfg{0.5, 0.15, 0.0};
  const auto one = PhotonNumberDistribution::fock(1);
  EXPECT_NEAR(gamma_n(one, cfg, 0), 0.15, 1e-15);
  EXPECT_NEAR(gamma_n(one, cfg, 1), 0.0, 1e-15);
  EXPECT_THROW(gamma_n(one, cfg, 2), DomainError);
  EXPECT_FALSE(try_gamma_n(one, cfg, 2).has_value());
}

TEST(GammaN, BlindMonitorGivesDarkRate) {
  const MonitorConfig cfg{0.5, 0.0, 3e-4};
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  for (std::size_t n = 0; n <= d.max_photon_number(); ++n) {
    EXPECT_NEAR(gamma_n(d, cfg, n), 3e-4, 1e-15);
  }
}

TEST(GammaN, MatchesSplittingOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto weights = oracle::random_weights(rng, 1 + trial % 12);
    const auto d = make_distribution(weights);
    const MonitorConfig cfg{0.05 + 0.9 * u(rng), u(rng), 0.01 * u(rng)};
    for (std::size_t n = 0; n <= std::min<std::size_t>(10, d.max_photon_number()); ++n) {
      const double expected =
          oracle::gamma_by_splitting(as_vector(d), cfg.R, cfg.eta_M, cfg.d_M, n);
      const double got = gamma_n(d, cfg, n);
      EXPECT_NEAR(got, expected, 1e-12) << "trial " << trial << " n " << n;
      EXPECT_GE(got, cfg.d_M - 1e-15);
      EXPECT_LE(got, 1.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 200);
}

TEST(GammaN, PoissonConstancyProperty) {
  for (double mu : {0.05, 0.5, 2.0}) {
    for (const MonitorConfig& cfg : {MonitorConfig{0.5, 0.15, 1e-6}, MonitorConfig{0.2, 0.6, 0.0}}) {
      const auto pois = poissonian(mu);
      double lo = 1.0, hi = 0.0;
      for (std::size_t n = 0; n <= 10; ++n) {
        const double g = gamma_n(pois, cfg, n);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
      EXPECT_LT(hi - lo, 1e-10) << "mu=" << mu;
    }
  }
}

TEST(GammaNApprox, Examples) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  const double approx = gamma_n_approx(d, kReferenceMonitor, 1);
  EXPECT_NEAR(approx, 0.5 * 0.15 * 2.0 * d[2] / d[1], 1e-16);
  EXPECT_NEAR(approx / gamma_n(d, kReferenceMonitor, 1), 1.0, 0.2);

  const double no_two[] = {0.2, 0.8, 0.0};
  EXPECT_EQ(gamma_n_approx(make_distribution(no_two), kReferenceMonitor, 1), 0.0);
  EXPECT_THROW(gamma_n_approx(make_distribution(no_two), kReferenceMonitor, 2), DomainError);

  const auto pois = poissonian(0.3);
  for (std::size_t n = 1; n <= 5; ++n) {
    EXPECT_NEAR(gamma_n_approx(pois, kReferenceMonitor, n), 0.5 * 0.15 * 0.3, 1e-14);
  }
}

TEST(GammaNApprox, AgreesWithExactForSteepTails) {
  const MonitorConfig cfg{0.5, 0.15, 0.0};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ratio(0.001, 0.1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> w{0.1, 1.0};
    for (int n = 2; n <= 8; ++n) w.push_back(w.back() * ratio(rng));
    const auto d = make_distribution(w);
    for (std::size_t n : {1u, 2u}) {
      const double exact = gamma_n(d, cfg, n);
      EXPECT_LE(std::abs(gamma_n_approx(d, cfg, n) - exact) / exact, 0.25) << trial << " " << n;
    }
  }
}

TEST(TowardBob, Examples) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  const auto same = toward_bob_distribution(d, MonitorConfig{0.0, 0.15, 1e-6});
  for (std::size_t n = 0; n <= d.max_photon_number(); ++n) EXPECT_NEAR(same[n], d[n], 1e-16);

  const auto split = toward_bob_distribution(PhotonNumberDistribution::fock(1), kReferenceMonitor);
  EXPECT_NEAR(split[0], 0.5, 1e-16);
  EXPECT_NEAR(split[1], 0.5, 1e-16);

  const auto thinned = toward_bob_distribution(poissonian(1.3), MonitorConfig{0.3, 0.1, 0.0});
  for (std::size_t n = 0; n <= thinned.max_photon_number(); ++n) {
    EXPECT_NEAR(thinned[n], oracle::poisson_pmf(1.3 * 0.7, n), 1e-12) << n;
  }
}

TEST(TowardBob, MatchesOracleAndConservesMass) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = make_distribution(oracle::random_weights(rng, 2 + trial % 11));
    const MonitorConfig cfg{u(rng), 0.5, 0.0};
    const auto tb = toward_bob_distribution(d, cfg);
    double total = 0.0;
    for (std::size_t n = 0; n <= tb.max_photon_number(); ++n) {
      total += tb[n];
      EXPECT_NEAR(tb[n], oracle::prob_toward_bob(as_vector(d), cfg.R, n), 1e-13);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Decrements, PoissonianSelfMatch) {
  for (const auto& dec : decrements(poissonian(0.4), 8)) EXPECT_NEAR(dec.a, dec.b, 1e-12);
}

TEST(Decrements, ReferenceSourceHasSubPoissonianTail) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  const auto dec = decrements(d, 7);
  ASSERT_EQ(dec.size(), 7u);
  for (const auto& x : dec) {
    EXPECT_NEAR(x.a, std::log10(d[x.n] / d[x.n + 1]), 1e-14);
    if (x.n >= 2) {
      EXPECT_GT(x.a - x.b, 0.0) << x.n;
    }
  }
  // Higher photon numbers fall off by roughly 10^-1.7 per step.
  double mean = 0.0;
  for (std::size_t n = 4; n <= 7; ++n) {
    EXPECT_GT(dec[n - 1].a, 1.55);
    EXPECT_LT(dec[n - 1].a, 1.9);
    mean += dec[n - 1].a / 4.0;
  }
  EXPECT_NEAR(mean, 1.7, 0.1);
}

TEST(Decrements, ZeroProbabilityIsAnError) {
  const double w[] = {0.2, 0.8, 0.0, 0.0};
  EXPECT_THROW(decrements(make_distribution(w), 2), DomainError);
  const double gap[] = {0.2, 0.5, 0.2, 0.0, 0.1};
  EXPECT_THROW(decrements(make_distribution(gap), 3), DomainError);
  EXPECT_NO_THROW(decrements(make_distribution(gap), 1));
}

TEST(Characterize, ReferenceSourceAtNmax5) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  const auto sc = characterize(d, kReferenceMonitor, 5);

  double tail = 0.0;
  for (std::size_t n = 6; n <= d.max_photon_number(); ++n) tail += d[n];
  EXPECT_NEAR(sc.Delta, tail, 1e-22);
  EXPECT_EQ(sc.tail_class, TailClass::SubPoissonianTail);
  ASSERT_EQ(sc.gamma.size(), 6u);

  // gamma values come from the truncated, renormalized source.
  std::vector<double> truncated(d.probs().begin(), d.probs().begin() + 6);
  for (double& x : truncated) x /= (1.0 - sc.Delta);
  double gamma_max = 0.0;
  for (std::size_t n = 0; n <= 5; ++n) {
    const double g = oracle::gamma_by_splitting(truncated, 0.5, 0.15, 1e-6, n);
    EXPECT_NEAR(*sc.gamma[n], g, 1e-12);
    if (n >= 2) gamma_max = std::max(gamma_max, g);
  }
  EXPECT_NEAR(sc.Gamma, gamma_max, 1e-12);
  EXPECT_GT(sc.gamma1(), sc.Gamma);
  ASSERT_TRUE(sc.margin_r);
  EXPECT_GT(*sc.margin_r, 0.0);

  double kept = 0.0;
  for (double p : sc.rho_sp.probs()) kept += p;
  EXPECT_NEAR(sc.Delta + (1.0 - sc.Delta) * kept, 1.0, 1e-12);
}

TEST(Characterize, PoissonianIsUnclassified) {
  for (double mu : {0.1, 0.5, 2.0}) {
    const auto sc = characterize_full(poissonian(mu), MonitorConfig{0.5, 0.15, 0.0});
    EXPECT_NEAR(sc.gamma1(), sc.Gamma, 1e-14);
    EXPECT_EQ(sc.tail_class, TailClass::Unclassified) << mu;
  }
}

TEST(Characterize, BlindMonitorTiesEveryGamma) {
  const auto sc = characterize(sps_loss_background(0.1, 0.9, 0.1), MonitorConfig{0.5, 0.0, 1e-6}, 5);
  EXPECT_NEAR(sc.gamma1(), sc.Gamma, 1e-18);
  EXPECT_EQ(sc.tail_class, TailClass::Unclassified);
}

TEST(Characterize, HeraldedThermalIsSuperPoissonian) {
  const auto sc = characterize(heralded_thermal(0.1), kReferenceMonitor, 5);
  EXPECT_EQ(sc.tail_class, TailClass::SuperPoissonianTail);
  EXPECT_LT(sc.gamma1_full, sc.Upsilon);
  double lo = 1.0;
  for (std::size_t n = 2; n <= 5; ++n) lo = std::min(lo, gamma_n(heralded_thermal(0.1), kReferenceMonitor, n));
  EXPECT_NEAR(sc.Upsilon, lo, 1e-15);
}

TEST(Characterize, DeltaShrinksWithNmax) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  double previous = 1.0;
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto sc = characterize(d, kReferenceMonitor, n);
    EXPECT_LE(sc.Delta, previous);
    previous = sc.Delta;
  }
  EXPECT_LT(previous, 1e-20);
  EXPECT_EQ(characterize(d, kReferenceMonitor, d.max_photon_number()).Delta, 0.0);
}

TEST(Characterize, ErrorsAndUndefinedGammas) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  EXPECT_THROW(characterize(d, kReferenceMonitor, 1), DomainError);

  const double vacuum_heavy[] = {1.0, 0.0, 0.0, 0.5};
  const auto odd = make_distribution(vacuum_heavy);
  // R = 0: n photons reach Bob only if the source emits exactly n.
  const MonitorConfig direct{0.0, 0.15, 1e-6};
  EXPECT_THROW(characterize(odd, direct, 3), DomainError);  // gamma_1 undefined

  const double sparse[] = {0.1, 0.8, 0.0, 0.1};
  const auto sc = characterize(make_distribution(sparse), direct, 3);
  EXPECT_FALSE(sc.gamma[2].has_value());
  EXPECT_TRUE(sc.gamma[3].has_value());
  EXPECT_EQ(sc.Gamma, *sc.gamma[3]);
}

TEST(Characterize, AbsorbOptionMovesOffendingPhotonNumbers) {
  // Photon number 3 is over-represented, so gamma_2 exceeds gamma_1.
  const double w[] = {0.1, 0.8, 0.02, 0.08};
  const auto d = make_distribution(w);
  const auto plain = characterize(d, kReferenceMonitor, 3);
  EXPECT_NE(plain.tail_class, TailClass::SubPoissonianTail);

  CharacterizeOptions opts;
  opts.absorb_unwanted = true;
  const auto sc = characterize(d, kReferenceMonitor, 3, opts);
  ASSERT_FALSE(sc.absorbed.empty());
  double moved = 0.0;
  for (std::size_t n : sc.absorbed) {
    EXPECT_GE(*plain.gamma[n], plain.gamma1());
    moved += d[n];
  }
  EXPECT_NEAR(sc.Delta, moved, 1e-15);
  for (std::size_t n : sc.absorbed) EXPECT_EQ(sc.rho_sp[n], 0.0);
}

TEST(Characterize, FullCharacterizationHasNoTail) {
  const auto d = sps_loss_background(0.1, 0.9, 0.1);
  const auto sc = characterize_full(d, kReferenceMonitor);
  EXPECT_EQ(sc.Delta, 0.0);
  EXPECT_EQ(sc.n_max, d.max_photon_number());
  EXPECT_EQ(sc.tail_class, TailClass::SubPoissonianTail);
}

}  // namespace
}  // namespace bsqkd
