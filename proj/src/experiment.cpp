#include "bsqkd/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bsqkd/error.hpp"

namespace bsqkd {

std::string_view to_string(SourceModel m) noexcept {
  switch (m) {
    case SourceModel::SpsLossBackground:
      return "sps_loss_background";
    case SourceModel::Poissonian:
      return "poissonian";
    case SourceModel::Thermal:
      return "thermal";
    case SourceModel::HeraldedThermal:
      return "heralded_thermal";
    case SourceModel::Custom:
      return "custom";
  }
  return "custom";
}

PhotonNumberDistribution SourceSpec::build() const {
  switch (model) {
    case SourceModel::SpsLossBackground:
      return sps_loss_background(p0_sp, p1_sp, nu);
    case SourceModel::Poissonian:
      return poissonian(mu);
    case SourceModel::Thermal:
      return thermal(mu);
    case SourceModel::HeraldedThermal:
      return heralded_thermal(mu);
    case SourceModel::Custom:
      break;
  }
  return make_distribution(probs);
}

std::vector<double> SweepSpec::distances() const {
  if (!(step > 0.0)) throw DomainError("sweep: step must be positive");
  if (!(l_min >= 0.0) || !(l_max >= l_min)) throw DomainError("sweep: need 0 <= l_min <= l_max");
  const auto count = static_cast<std::size_t>(std::floor((l_max - l_min) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = l_min + step * static_cast<double>(i);
  return out;
}

Scenario reference_scenario() {
  Scenario s;
  s.source = SourceSpec{};
  s.monitor = MonitorConfig{0.5, 0.15, 1e-6};
  s.channel = ChannelConfig{0.2, 0.03, 0.01, 2.5e-9, 2};
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::string level_name(std::optional<std::size_t> n_max) {
  return n_max ? fmt::format("n_max={}", *n_max) : std::string("full characterization");
}

void require_sub_poissonian(const SourceCharacterization& sc, std::optional<std::size_t> n_max) {
  if (sc.tail_class == TailClass::SubPoissonianTail) return;
  std::size_t arg = 2;
  for (std::size_t n = 2; n < sc.gamma.size(); ++n) {
    if (sc.gamma[n] && *sc.gamma[n] == sc.Gamma) arg = n;
  }
  throw DomainError(fmt::format(
      "{}: gamma_1 = {:.10g} is not above Gamma = gamma_{} = {:.10g} (tail class: {}); "
      "the monitored key-rate bound does not apply",
      level_name(n_max), sc.gamma1(), arg, sc.Gamma, to_string(sc.tail_class)));
}

}  // namespace

RateModel::RateModel(const Scenario& scenario, std::optional<std::size_t> n_max)
    : scenario_(scenario), source_(scenario.source.build()), moments_(moments(source_)) {
  CharacterizeOptions opts;
  opts.absorb_unwanted = scenario.absorb_unwanted;
  sc_ = n_max ? characterize(source_, scenario.monitor, *n_max, opts)
              : characterize_full(source_, scenario.monitor);
  require_sub_poissonian(sc_, n_max);
  sp_ = SecurityParams::from(sc_, scenario.q, scenario.f);
}

SweepRow RateModel::row(double l_km) const {
  const auto obs = observables(source_, scenario_.monitor, scenario_.channel, l_km);
  MinimizerOptions mopts;
  mopts.grid_points = scenario_.grid_points;
  const auto kr = key_rates(obs, sp_, mopts);

  SweepRow r;
  r.distance_km = l_km;
  r.Q = obs.Q;
  r.Q_c = obs.Q_c;
  r.Q_nc = obs.Q_nc;
  r.E_c = obs.E_c;
  r.E_nc = obs.E_nc;
  r.G_c = kr.G_c();
  r.G_nc = kr.G_nc();
  r.G_both = kr.G_both();
  r.G = kr.G;
  r.G_over_q = kr.G / scenario_.q;
  r.baseline_ideal = std::max(0.0, baseline_ideal_sps(scenario_.channel, sp_, l_km));
  r.baseline_conventional = std::max(0.0, baseline_conventional(obs, moments_));
  r.rule_of_thumb = sub_poissonian_rule_of_thumb(obs, sc_);
  return r;
}

double RateModel::key_rate(double l_km) const { return row(l_km).G; }

std::vector<Curve> run_sweep(const Scenario& scenario, const SweepOptions& opts) {
  scenario.validate();
  std::vector<std::optional<std::size_t>> levels;
  auto n_max = scenario.n_max;
  std::sort(n_max.begin(), n_max.end());
  for (std::size_t n : n_max) levels.emplace_back(n);
  if (scenario.include_full) levels.emplace_back(std::nullopt);

  // Characterize everything first so a bad level fails before any sweeping.
  std::vector<RateModel> models;
  models.reserve(levels.size());
  for (const auto& level : levels) models.emplace_back(scenario, level);

  const auto distances = scenario.sweep.distances();
  std::vector<Curve> curves;
  for (std::size_t c = 0; c < levels.size(); ++c) {
    Curve curve;
    curve.label = levels[c] ? fmt::format("nmax_{}", *levels[c]) : std::string("delta0");
    curve.n_max = levels[c];
    curve.characterization = models[c].characterization();
    curve.rows.resize(distances.size());
    curves.push_back(std::move(curve));
  }

  // Work items are (curve, distance) pairs; each writes its own slot.
  const std::size_t total = levels.size() * distances.size();
  auto work = [&](std::size_t k) {
    const std::size_t c = k / distances.size();
    const std::size_t i = k % distances.size();
    curves[c].rows[i] = models[c].row(distances[i]);
  };

  unsigned n_threads = 1;
  if (opts.parallel) {
    n_threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  }
  if (n_threads <= 1 || total < 2) {
    for (std::size_t k = 0; k < total; ++k) work(k);
    return curves;
  }

  std::vector<std::exception_ptr> errors(n_threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t k = t; k < total; k += n_threads) work(k);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return curves;
}

ThresholdResult threshold_search(const std::function<double(double)>& rate, const SweepSpec& sweep,
                                 double resolution_km) {
  const auto distances = sweep.distances();
  ThresholdResult res;
  if (!(rate(distances.front()) > 0.0)) return res;

  std::size_t first_bad = distances.size();
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (!(rate(distances[i]) > 0.0)) {
      first_bad = i;
      break;
    }
  }
  if (first_bad == distances.size()) {
    res.kind = ThresholdResult::Kind::BeyondRange;
    res.km = distances.back();
    return res;
  }

  double lo = distances[first_bad - 1];
  double hi = distances[first_bad];
  while (hi - lo > resolution_km) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > 0.0 ? lo : hi) = mid;
  }
  res.kind = ThresholdResult::Kind::Found;
  res.km = lo;
  return res;
}

ThresholdResult threshold_distance(const Scenario& scenario, std::optional<std::size_t> n_max) {
  scenario.validate();
  const RateModel model(scenario, n_max);
  return threshold_search([&model](double l) { return model.key_rate(l); }, scenario.sweep);
}

// ---------------------------------------------------------------------------

std::string format_shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.15e}", v);
}

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_csv_number(*v) : std::string("nan");
  };
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                       format_csv_number(r.distance_km), format_csv_number(r.Q),
                       format_csv_number(r.Q_c), format_csv_number(r.Q_nc), opt(r.E_c),
                       opt(r.E_nc), format_csv_number(r.G_c), format_csv_number(r.G_nc),
                       format_csv_number(r.G_both), format_csv_number(r.G),
                       format_csv_number(r.G_over_q), format_csv_number(r.baseline_ideal),
                       format_csv_number(r.baseline_conventional),
                       format_csv_number(r.rule_of_thumb));
  }
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace bsqkd
