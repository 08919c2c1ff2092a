// Command-line front end: characterize a source, sweep key rates over distance,
// locate threshold distances, and cross-check the channel model by simulation.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "bsqkd/error.hpp"
#include "bsqkd/experiment.hpp"
#include "bsqkd/kernels.hpp"

namespace {

using namespace bsqkd;

struct Common {
  std::string config;
  std::vector<std::size_t> nmax;
};

Scenario load(const Common& c) {
  Scenario s = parse_config(c.config);
  if (!c.nmax.empty()) s.n_max = c.nmax;
  s.validate();
  return s;
}

std::string opt_number(const std::optional<double>& v) {
  return v ? fmt::format("{:.10g}", *v) : std::string("undefined");
}

int run_characterize(const Common& c) {
  const Scenario s = load(c);
  const auto source = s.source.build();
  const auto m = moments(source);
  fmt::print("source: {} (N = {})\n", to_string(s.source.model), source.max_photon_number());
  fmt::print("  mu = {:.10g}  g2 = {}  p_multi = {:.10g}\n", m.mu, opt_number(m.g2), m.p_multi);

  const std::size_t up_to = std::min<std::size_t>(source.max_photon_number() - 1, 10);
  try {
    fmt::print("decrements (a_n = log10 p_n/p_n+1, b_n matched Poissonian):\n");
    for (const auto& d : decrements(source, up_to)) {
      fmt::print("  n={:<3} a={:<12.6f} b={:<12.6f} a-b={:.6f}\n", d.n, d.a, d.b, d.a - d.b);
    }
  } catch (const DomainError& e) {
    fmt::print("  not available: {}\n", e.what());
  }

  CharacterizeOptions opts;
  opts.absorb_unwanted = s.absorb_unwanted;
  const auto obs = observables(source, s.monitor, s.channel, s.sweep.l_min);
  for (std::size_t n_max : s.n_max) {
    const auto sc = characterize(source, s.monitor, n_max, opts);
    fmt::print("\nn_max = {}: Delta = {:.6e}  tail = {}\n", n_max, sc.Delta, to_string(sc.tail_class));
    for (std::size_t n = 0; n < sc.gamma.size(); ++n) {
      fmt::print("  gamma_{:<3} = {}\n", n, opt_number(sc.gamma[n]));
    }
    fmt::print("  Gamma = {:.10g}  Upsilon = {:.10g}  margin r = {}\n", sc.Gamma, sc.Upsilon,
               opt_number(sc.margin_r));
    for (std::size_t n : sc.absorbed) fmt::print("  absorbed n = {} into Delta\n", n);
    if (sc.tail_class == TailClass::SubPoissonianTail) {
      fmt::print("  rule of thumb at {} km: G ~ Q - Delta/(gamma1 - Gamma) = {:.6e}\n",
                 s.sweep.l_min, sub_poissonian_rule_of_thumb(obs, sc));
    } else if (sc.tail_class == TailClass::SuperPoissonianTail) {
      fmt::print("  rule of thumb at {} km: G ~ Q - Delta/(1 - gamma1/Upsilon) = {:.6e}\n",
                 s.sweep.l_min, super_poissonian_rule_of_thumb(obs, sc));
    }
  }
  return 0;
}

int run_sweep_cmd(const Common& c, const std::string& out_dir, bool parallel) {
  const Scenario s = load(c);
  SweepOptions opts;
  opts.parallel = parallel;
  const auto curves = run_sweep(s, opts);
  if (out_dir.empty()) {
    for (const auto& curve : curves) {
      std::cout << "# " << curve.label << '\n';
      write_csv(curve.rows, std::cout);
    }
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  for (const auto& curve : curves) {
    const auto path = std::filesystem::path(out_dir) / (curve.label + ".csv");
    emit_csv(curve.rows, path);
    fmt::print(stderr, "wrote {}\n", path.string());
  }
  return 0;
}

std::string describe(const ThresholdResult& t) {
  switch (t.kind) {
    case ThresholdResult::Kind::Found:
      return fmt::format("{:.1f} km", t.km);
    case ThresholdResult::Kind::BeyondRange:
      return fmt::format("beyond sweep range (> {:.1f} km)", t.km);
    case ThresholdResult::Kind::NoKey:
      break;
  }
  return "no key at any distance";
}

int run_threshold(const Common& c) {
  const Scenario s = load(c);
  std::vector<std::optional<std::size_t>> levels(s.n_max.begin(), s.n_max.end());
  if (s.include_full) levels.emplace_back(std::nullopt);
  for (const auto& level : levels) {
    const auto t = threshold_distance(s, level);
    fmt::print("{:<10} {}\n", level ? fmt::format("n_max={}", *level) : "delta=0", describe(t));
  }

  const auto source = s.source.build();
  const auto m = moments(source);
  const auto conventional = threshold_search(
      [&](double l) {
        return baseline_conventional(observables(source, s.monitor, s.channel, l), m);
      },
      s.sweep);
  fmt::print("{:<10} {}\n", "conv.", describe(conventional));

  SecurityParams sp;
  sp.q = s.q;
  sp.f = s.f;
  const auto ideal = threshold_search(
      [&](double l) { return baseline_ideal_sps(s.channel, sp, l); }, s.sweep);
  fmt::print("{:<10} {}\n", "ideal-SPS", describe(ideal));
  return 0;
}

int run_montecarlo(const Common& c, std::optional<std::uint64_t> seed, const std::string& out) {
  const Scenario s = load(c);
  const MonteCarloSpec mc = s.montecarlo.value_or(MonteCarloSpec{});
  const std::uint64_t base_seed = seed.value_or(mc.seed);
  const auto source = s.source.build();

  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "distance_km,quantity,analytic,empirical,std_error,z\n";

  for (std::size_t i = 0; i < mc.distances.size(); ++i) {
    const double l = mc.distances[i];
    const auto a = observables(source, s.monitor, s.channel, l);
    const auto e = monte_carlo_observables(source, s.monitor, s.channel, l, mc.n_pulses,
                                           base_seed ^ static_cast<std::uint64_t>(i));
    auto rate_line = [&](const char* name, double analytic, double empirical) {
      const double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(mc.n_pulses));
      const double z = se > 0.0 ? (empirical - analytic) / se : 0.0;
      os << fmt::format("{},{},{},{},{},{}\n", format_csv_number(l), name,
                        format_csv_number(analytic), format_csv_number(empirical),
                        format_csv_number(se), format_csv_number(z));
    };
    rate_line("Q", a.Q, e.Q);
    rate_line("Q_c", a.Q_c, e.Q_c);
    rate_line("Q_nc", a.Q_nc, e.Q_nc);
    auto error_line = [&](const char* name, const std::optional<double>& analytic,
                          const std::optional<double>& empirical, double detected) {
      const double av = analytic.value_or(std::nan(""));
      const double ev = empirical.value_or(std::nan(""));
      const double count = detected * static_cast<double>(mc.n_pulses);
      const double se = count > 0.0 ? std::sqrt(av * (1.0 - av) / count) : std::nan("");
      const double z = se > 0.0 ? (ev - av) / se : std::nan("");
      os << fmt::format("{},{},{},{},{},{}\n", format_csv_number(l), name, format_csv_number(av),
                        format_csv_number(ev), format_csv_number(se), format_csv_number(z));
    };
    error_line("E_c", a.E_c, e.E_c, e.Q_c);
    error_line("E_nc", a.E_nc, e.E_nc, e.Q_nc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key rates of beam-splitter-monitored BB84 with practical single-photon sources"};
  app.require_subcommand(1);

  Common common;
  std::string out;
  bool parallel = false;
  std::optional<std::uint64_t> seed;
  std::string isa;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--nmax", common.nmax, "Override the characterization levels")->delimiter(',');
    sub->add_option("--isa", isa, "Kernel variant: scalar or avx2 (default: best available)");
  };

  auto* characterize_cmd = app.add_subcommand("characterize", "Print gamma table, Gamma, Delta, tail class");
  add_common(characterize_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Key rate versus distance, one CSV per curve");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--out", out, "Output directory (stdout if omitted)");
  sweep_cmd->add_flag("--parallel", parallel, "Evaluate distance points on all cores");

  auto* threshold_cmd = app.add_subcommand("threshold", "Largest distance with a positive key rate");
  add_common(threshold_cmd);

  auto* mc_cmd = app.add_subcommand("montecarlo", "Simulated versus analytic observables");
  add_common(mc_cmd);
  mc_cmd->add_option("--seed", seed, "Override [montecarlo] seed");
  mc_cmd->add_option("--out", out, "Output CSV (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (isa == "scalar") {
      kernels::set_active_isa(kernels::Isa::Scalar);
    } else if (isa == "avx2") {
      kernels::set_active_isa(kernels::Isa::Avx2);
    } else if (!isa.empty()) {
      throw std::invalid_argument("unknown --isa '" + isa + "'");
    }

    if (*characterize_cmd) return run_characterize(common);
    if (*sweep_cmd) return run_sweep_cmd(common, out, parallel);
    if (*threshold_cmd) return run_threshold(common);
    if (*mc_cmd) return run_montecarlo(common, seed, out);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error ({}): {}\n", e.key(), e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
