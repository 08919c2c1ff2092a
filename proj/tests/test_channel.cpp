#include <gtest/gtest.h>

#include <cmath>

#include "bsqkd/channel.hpp"
#include "bsqkd/error.hpp"
#include "oracles.hpp"

namespace bsqkd {
namespace {

const MonitorConfig kMonitor{0.5, 0.15, 1e-6};
const ChannelConfig kChannel{};

// Q, Q_c, Q_nc, E_c, E_nc of the reference source, summed independently over how the
// source's photons split between Bob and the monitor.
struct Frozen {
  double l, Q, Q_c, Q_nc, E_c, E_nc;
};
constexpr Frozen kFrozen[] = {
    {0.0, 0.0049976305582488570, 7.0836731965209496e-5, 0.0049267938262836475,
     0.030002468133951934, 0.030000439113368659},
    {100.0, 5.0004762250578270e-5, 7.0899449573589204e-7, 4.9295767754842378e-5,
     0.030246827506339694, 0.030044119064440701},
};

TEST(Transmittance, Examples) {
  EXPECT_DOUBLE_EQ(transmittance(kChannel, 0.0), 0.01);
  EXPECT_NEAR(transmittance(kChannel, 50.0), 0.001, 1e-18);
  EXPECT_NEAR(transmittance(kChannel, 100.0), 1e-4, 1e-19);
  EXPECT_THROW(transmittance(kChannel, -1.0), DomainError);
}

TEST(YieldAndError, Examples) {
  const double dB = 2.5e-9 * (2.0 - 2.5e-9);  // 1 - (1 - d)^2 without cancellation
  EXPECT_NEAR(kChannel.dark_probability(), dB, 1e-24);

  const auto vac = yield_and_error(kChannel, 0.01, 0);
  EXPECT_NEAR(vac.yield, dB, 1e-24);
  EXPECT_DOUBLE_EQ(vac.error, 0.5);

  const auto one = yield_and_error(kChannel, 0.01, 1);
  EXPECT_NEAR(one.yield, 0.01 + 0.99 * dB, 1e-17);
  EXPECT_NEAR(one.error, (0.03 * 0.01 + 0.5 * 0.99 * dB) / one.yield, 1e-14);

  const auto two = yield_and_error(kChannel, 0.01, 2);
  EXPECT_NEAR(two.yield, 1.0 - 0.99 * 0.99 * (1.0 - dB), 1e-16);

  EXPECT_THROW(yield_and_error(kChannel, 1.5, 1), DomainError);
}

TEST(Observables, FrozenReferenceValues) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  for (const auto& f : kFrozen) {
    const auto obs = observables(source, kMonitor, kChannel, f.l);
    EXPECT_NEAR(obs.Q / f.Q, 1.0, 1e-10) << f.l;
    EXPECT_NEAR(obs.Q_c / f.Q_c, 1.0, 1e-10) << f.l;
    EXPECT_NEAR(obs.Q_nc / f.Q_nc, 1.0, 1e-10) << f.l;
    ASSERT_TRUE(obs.E_c && obs.E_nc);
    EXPECT_NEAR(*obs.E_c / f.E_c, 1.0, 1e-10) << f.l;
    EXPECT_NEAR(*obs.E_nc / f.E_nc, 1.0, 1e-10) << f.l;
  }
}

TEST(Observables, ClickedRateIsGammaWeighted) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  const std::vector<double> p(source.probs().begin(), source.probs().end());
  const auto obs = observables(source, kMonitor, kChannel, 37.0);
  double q = 0.0, qc = 0.0;
  for (std::size_t n = 0; n < 12; ++n) {
    const double yn = yield_and_error(kChannel, transmittance(kChannel, 37.0), n).yield;
    const double pb = oracle::prob_toward_bob(p, 0.5, n);
    EXPECT_NEAR(obs.Q_n[n], pb * yn, 1e-15 + 1e-12 * pb * yn) << n;
    q += pb * yn;
    qc += oracle::gamma_by_splitting(p, 0.5, 0.15, 1e-6, n) * pb * yn;
  }
  EXPECT_NEAR(obs.Q / q, 1.0, 1e-12);
  EXPECT_NEAR(obs.Q_c / qc, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(obs.Q_nc, obs.Q - obs.Q_c);
}

TEST(Observables, LawOfTotalError) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  for (double l : {0.0, 80.0, 250.0, 450.0}) {
    const auto obs = observables(source, kMonitor, kChannel, l);
    EXPECT_NEAR(*obs.E_c * obs.Q_c + *obs.E_nc * obs.Q_nc, obs.error_mass,
                1e-14 * obs.error_mass);
  }
}

TEST(Observables, MonotoneInDistance) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  auto prev = observables(source, kMonitor, kChannel, 0.0);
  for (double l = 10.0; l <= 500.0; l += 10.0) {
    const auto obs = observables(source, kMonitor, kChannel, l);
    EXPECT_LT(obs.Q, prev.Q) << l;
    EXPECT_LT(obs.Q_c, prev.Q_c) << l;
    EXPECT_LT(obs.Q_nc, prev.Q_nc) << l;
    EXPECT_GE(*obs.E_c, *prev.E_c - 1e-15) << l;
    EXPECT_GE(*obs.E_nc, *prev.E_nc - 1e-15) << l;
    prev = obs;
  }
}

TEST(Observables, DarkCountsDominateFarAway) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  const auto obs = observables(source, kMonitor, kChannel, 600.0);
  EXPECT_NEAR(*obs.E_c, 0.5, 1e-3);
  EXPECT_NEAR(*obs.E_nc, 0.5, 1e-3);
}

TEST(Observables, UndefinedErrorRates) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  ChannelConfig silent = kChannel;
  silent.d_det = 0.0;
  const auto obs = observables(source, MonitorConfig{0.5, 0.0, 0.0}, silent, 10.0);
  EXPECT_EQ(obs.Q_c, 0.0);
  EXPECT_FALSE(obs.E_c.has_value());
  EXPECT_TRUE(obs.E_nc.has_value());
}

TEST(MonteCarlo, DeterministicForSeed) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  const auto a = monte_carlo_observables(source, kMonitor, kChannel, 0.0, 200000, 42);
  const auto b = monte_carlo_observables(source, kMonitor, kChannel, 0.0, 200000, 42);
  const auto c = monte_carlo_observables(source, kMonitor, kChannel, 0.0, 200000, 43);
  EXPECT_EQ(a.Q, b.Q);
  EXPECT_EQ(a.Q_c, b.Q_c);
  EXPECT_EQ(a.E_nc, b.E_nc);
  EXPECT_NE(a.Q_nc, c.Q_nc);
  EXPECT_THROW(monte_carlo_observables(source, kMonitor, kChannel, 0.0, 0, 1), DomainError);
}

TEST(MonteCarlo, SilentMonitorNeverClicks) {
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  const auto obs =
      monte_carlo_observables(source, MonitorConfig{0.5, 0.0, 0.0}, kChannel, 0.0, 200000, 7);
  EXPECT_EQ(obs.Q_c, 0.0);
  EXPECT_FALSE(obs.E_c.has_value());
  EXPECT_GT(obs.Q_nc, 0.0);
}

TEST(MonteCarlo, AgreesWithAnalyticModel) {
  // Large gains so a modest pulse count resolves every observable.
  const auto source = sps_loss_background(0.1, 0.9, 0.1);
  ChannelConfig bright = kChannel;
  bright.eta_B = 0.5;
  bright.e_det = 0.05;
  const MonitorConfig mon{0.5, 0.6, 1e-3};
  const std::uint64_t n = 2'000'000;
  const auto a = observables(source, mon, bright, 5.0);
  const auto e = monte_carlo_observables(source, mon, bright, 5.0, n, 99);
  auto within = [n](double analytic, double empirical, double count) {
    const double se = std::sqrt(analytic * (1.0 - analytic) / count);
    return std::abs(empirical - analytic) <= 5.0 * se;
  };
  EXPECT_TRUE(within(a.Q, e.Q, n));
  EXPECT_TRUE(within(a.Q_c, e.Q_c, n));
  EXPECT_TRUE(within(a.Q_nc, e.Q_nc, n));
  EXPECT_TRUE(within(*a.E_c, *e.E_c, e.Q_c * n));
  EXPECT_TRUE(within(*a.E_nc, *e.E_nc, e.Q_nc * n));
}

}  // namespace
}  // namespace bsqkd
