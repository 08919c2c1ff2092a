#include "bsqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bsqkd/error.hpp"
#include "bsqkd/kernels.hpp"
#include "bsqkd/minimize.hpp"

namespace bsqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_margin(const SecurityParams& sp) {
  if (!(sp.gamma1 > sp.Gamma)) {
    throw PreconditionError("security bound needs gamma1 > Gamma (gamma1=" +
                            std::to_string(sp.gamma1) + ", Gamma=" + std::to_string(sp.Gamma) +
                            ")");
  }
}

// Erroneous detection mass Q_j E_j; an empty event class carries none.
double error_mass(double rate, const std::optional<double>& err) {
  return err ? rate * *err : 0.0;
}

kernels::Chi0Objective make_objective(const ChannelObservables& obs, const SecurityParams& sp,
                                      double w_vacuum, double w_single) {
  kernels::Chi0Objective obj;
  obj.xi_offset = obs.Q_c - sp.Gamma * obs.Q - (1.0 - sp.Gamma) * sp.Delta;
  obj.xi_slope = sp.gamma0 - sp.Gamma;
  obj.xi_scale = 1.0 / (sp.gamma1 - sp.Gamma);

  obj.use_clicked = sp.gamma1 > 0.0;
  obj.err_clicked = error_mass(obs.Q_c, obs.E_c);
  obj.half_gamma0 = 0.5 * sp.gamma0;
  obj.inv_gamma1 = obj.use_clicked ? 1.0 / sp.gamma1 : 0.0;

  obj.use_nonclicked = sp.gamma1 < 1.0;
  obj.err_nonclicked = error_mass(obs.Q_nc, obs.E_nc);
  obj.half_one_minus_gamma0 = 0.5 * (1.0 - sp.gamma0);
  obj.inv_one_minus_gamma1 = obj.use_nonclicked ? 1.0 / (1.0 - sp.gamma1) : 0.0;

  obj.w_vacuum = w_vacuum;
  obj.w_single = w_single;
  return obj;
}

BranchRate minimize_branch(const kernels::Chi0Objective& obj, std::span<const double> xs,
                           const MinimizerOptions& opts, const ChannelObservables& obs,
                           const SecurityParams& sp, double leak) {
  std::vector<double> values(xs.size());
  kernels::scan(obj, xs, values);
  const auto i = static_cast<std::size_t>(
      std::distance(values.begin(), std::min_element(values.begin(), values.end())));

  // Grid values may come from a vector kernel; everything compared below is
  // re-evaluated by the scalar reference.
  ScalarMinimum best{xs[i], kernels::evaluate(obj, xs[i])};
  if (xs.size() > 1) {
    const double lo = xs[i == 0 ? 0 : i - 1];
    const double hi = xs[std::min(i + 1, xs.size() - 1)];
    const auto refined = golden_section_minimize(
        [&obj](double x) { return kernels::evaluate(obj, x); }, lo, hi, opts.rel_tol);
    if (refined.value < best.value) best = refined;
  }

  BranchRate br;
  br.rate = sp.q * (best.value - leak);
  br.chi0_star = best.x;
  br.xi_at_star = xi(best.x, obs, sp);
  if (auto e = epsilon(best.x, obs, sp)) br.eps_at_star = std::clamp(*e, 0.0, 0.5);
  return br;
}

}  // namespace

SecurityParams SecurityParams::from(const SourceCharacterization& sc, double q, double f) {
  SecurityParams sp;
  sp.q = q;
  sp.f = f;
  sp.gamma0 = sc.gamma0();
  sp.gamma1 = sc.gamma1();
  sp.Gamma = sc.Gamma;
  sp.Delta = sc.Delta;
  return sp;
}

void SecurityParams::validate() const {
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("security: q must lie in (0, 1]");
  if (!(f >= 1.0)) throw PreconditionError("security: f must be at least 1");
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw PreconditionError("security: gamma0 outside [0, 1]");
  if (!(gamma1 <= 1.0)) throw PreconditionError("security: gamma1 exceeds 1");
  if (!(Gamma >= 0.0)) throw PreconditionError("security: Gamma must be nonnegative");
  if (!(Delta >= 0.0 && Delta < 1.0)) throw PreconditionError("security: Delta outside [0, 1)");
  require_margin(*this);
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("binary_entropy: argument " + std::to_string(x) + " outside [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double xi(double chi0, const ChannelObservables& obs, const SecurityParams& sp) {
  require_margin(sp);
  return (obs.Q_c - sp.Gamma * obs.Q - (1.0 - sp.Gamma) * sp.Delta -
          (sp.gamma0 - sp.Gamma) * chi0) /
         (sp.gamma1 - sp.Gamma);
}

std::optional<double> epsilon(double chi0, const ChannelObservables& obs,
                              const SecurityParams& sp) {
  const double x = xi(chi0, obs, sp);
  if (!(x > 0.0)) return std::nullopt;
  double bound = kInf;
  if (sp.gamma1 > 0.0) {
    bound = std::min(bound,
                     (error_mass(obs.Q_c, obs.E_c) - sp.gamma0 * chi0 / 2.0) / (sp.gamma1 * x));
  }
  if (sp.gamma1 < 1.0) {
    bound = std::min(bound, (error_mass(obs.Q_nc, obs.E_nc) - (1.0 - sp.gamma0) * chi0 / 2.0) /
                                ((1.0 - sp.gamma1) * x));
  }
  return bound;
}

double chi0_upper_limit(const ChannelObservables& obs, const SecurityParams& sp) {
  double cap = obs.Q;
  if (sp.gamma0 > 0.0) cap = std::min(cap, 2.0 * error_mass(obs.Q_c, obs.E_c) / sp.gamma0);
  if (sp.gamma0 < 1.0) {
    cap = std::min(cap, 2.0 * error_mass(obs.Q_nc, obs.E_nc) / (1.0 - sp.gamma0));
  }
  return std::max(cap, 0.0);
}

KeyRateResult key_rates(const ChannelObservables& obs, const SecurityParams& sp,
                        const MinimizerOptions& opts) {
  sp.validate();
  if (opts.grid_points < 2) throw DomainError("key_rates: grid needs at least two points");

  KeyRateResult res;
  res.chi0_max = chi0_upper_limit(obs, sp);
  const std::vector<double> xs =
      res.chi0_max > 0.0 ? linspace(0.0, res.chi0_max, opts.grid_points) : std::vector<double>{0.0};

  const double leak_c = obs.Q_c * sp.f * binary_entropy(obs.E_c.value_or(0.0));
  const double leak_nc = obs.Q_nc * sp.f * binary_entropy(obs.E_nc.value_or(0.0));

  if (obs.E_c) {
    res.clicked = minimize_branch(make_objective(obs, sp, sp.gamma0, sp.gamma1), xs, opts, obs, sp,
                                  leak_c);
  } else {
    res.clicked.rate = -kInf;
  }
  if (obs.E_nc) {
    res.nonclicked = minimize_branch(make_objective(obs, sp, 1.0 - sp.gamma0, 1.0 - sp.gamma1), xs,
                                     opts, obs, sp, leak_nc);
  } else {
    res.nonclicked.rate = -kInf;
  }
  res.both = minimize_branch(make_objective(obs, sp, 1.0, 1.0), xs, opts, obs, sp,
                             leak_c + leak_nc);

  res.G = std::max({res.both.rate, res.clicked.rate, res.nonclicked.rate, 0.0});
  return res;
}

double ideal_case_rate(const ChannelObservables& obs, const SecurityParams& sp) {
  if (obs.E_c.value_or(0.0) != 0.0 || obs.E_nc.value_or(0.0) != 0.0) {
    throw PreconditionError("ideal_case_rate: observed error rates must be zero");
  }
  return xi(0.0, obs, sp);
}

double baseline_conventional(const ChannelObservables& obs, const SourceMoments& m) {
  return obs.Q - m.p_multi;
}

double baseline_ideal_sps(const ChannelConfig& cfg, const SecurityParams& sp, double l_km) {
  const double eta = transmittance(cfg, l_km);
  const double single = eta;  // 1 - (1 - eta)^1
  const double vacuum = (1.0 - single) * cfg.dark_probability();
  const double Q = single + vacuum;
  const double E = (cfg.e_det * single + 0.5 * vacuum) / Q;

  double rate = -Q * sp.f * binary_entropy(E) + vacuum;
  if (single > 0.0) {
    const double e1 = (E * Q - vacuum / 2.0) / single;
    if (e1 >= 0.0 && e1 <= 0.5) rate += single * (1.0 - binary_entropy(e1));
  }
  return sp.q * rate;
}

double sub_poissonian_rule_of_thumb(const ChannelObservables& obs,
                                    const SourceCharacterization& sc) {
  const double margin = sc.gamma1() - sc.Gamma;
  if (!(margin > 0.0)) {
    throw PreconditionError("sub-Poissonian rule of thumb needs gamma1 > Gamma");
  }
  return std::max(0.0, obs.Q - sc.Delta / margin);
}

double super_poissonian_rule_of_thumb_signed(const ChannelObservables& obs,
                                             const SourceCharacterization& sc) {
  if (!(sc.gamma1_full < sc.Upsilon)) {
    throw PreconditionError("super-Poissonian rule of thumb needs gamma1 < Upsilon");
  }
  return obs.Q - sc.Delta / (1.0 - sc.gamma1_full / sc.Upsilon);
}

double super_poissonian_rule_of_thumb(const ChannelObservables& obs,
                                      const SourceCharacterization& sc) {
  return std::max(0.0, super_poissonian_rule_of_thumb_signed(obs, sc));
}

double required_g2_for_distance(const ChannelConfig& cfg, double mu, double l_km) {
  if (!(mu > 0.0)) throw DomainError("required_g2_for_distance: mu must be positive");
  const double Q = mu * yield_and_error(cfg, transmittance(cfg, l_km), 1).yield;
  return 2.0 * Q / (mu * mu);
}

}  // namespace bsqkd
