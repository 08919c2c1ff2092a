#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsqkd/channel.hpp"
#include "bsqkd/monitor.hpp"
#include "bsqkd/photon_stats.hpp"
#include "bsqkd/security.hpp"

namespace bsqkd {

enum class SourceModel { SpsLossBackground, Poissonian, Thermal, HeraldedThermal, Custom };

std::string_view to_string(SourceModel m) noexcept;

struct SourceSpec {
  SourceModel model = SourceModel::SpsLossBackground;
  double p0_sp = 0.1;
  double p1_sp = 0.9;
  double nu = 0.1;    ///< Poissonian background mean (sps_loss_background)
  double mu = 1.0;    ///< mean of poissonian / thermal / heralded_thermal
  std::vector<double> probs;  ///< custom weights

  PhotonNumberDistribution build() const;
  bool operator==(const SourceSpec&) const = default;
};

struct SweepSpec {
  double l_min = 0.0;
  double l_max = 500.0;
  double step = 1.0;

  /// l_min, l_min + step, ... up to l_max (inclusive within 1e-9 km).
  std::vector<double> distances() const;
  bool operator==(const SweepSpec&) const = default;
};

struct MonteCarloSpec {
  std::uint64_t n_pulses = 10'000'000;
  std::uint64_t seed = 1;
  std::vector<double> distances{0.0, 100.0};
  bool operator==(const MonteCarloSpec&) const = default;
};

struct Scenario {
  SourceSpec source;
  MonitorConfig monitor;
  ChannelConfig channel;
  double q = 0.5;
  double f = 1.2;
  std::size_t grid_points = 2001;
  std::vector<std::size_t> n_max{4, 5, 6, 7};
  bool include_full = true;  ///< add the fully characterized (Delta = 0) curve
  bool absorb_unwanted = false;
  SweepSpec sweep;
  std::optional<MonteCarloSpec> montecarlo;

  /// Throws ConfigError on an inconsistent scenario.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

/// The scenario used throughout the tests: lossy single-photon emitter with
/// Poissonian background (g2 = 0.19), 50/50 monitor tap, telecom receiver.
Scenario reference_scenario();

struct SweepRow {
  double distance_km = 0.0;
  double Q = 0.0;
  double Q_c = 0.0;
  double Q_nc = 0.0;
  std::optional<double> E_c;
  std::optional<double> E_nc;
  double G_c = 0.0;
  double G_nc = 0.0;
  double G_both = 0.0;
  double G = 0.0;
  double G_over_q = 0.0;
  double baseline_ideal = 0.0;
  double baseline_conventional = 0.0;
  double rule_of_thumb = 0.0;
};

/// One key-rate curve: a characterization level and its rows in ascending distance.
struct Curve {
  std::string label;             ///< "nmax_5", or "delta0" for the full characterization
  std::optional<std::size_t> n_max;
  SourceCharacterization characterization;
  std::vector<SweepRow> rows;
};

/// Evaluates one curve's quantities at arbitrary distances.
class RateModel {
 public:
  RateModel(const Scenario& scenario, std::optional<std::size_t> n_max);

  const SourceCharacterization& characterization() const noexcept { return sc_; }
  SweepRow row(double l_km) const;
  double key_rate(double l_km) const;

 private:
  Scenario scenario_;
  PhotonNumberDistribution source_;
  SourceMoments moments_;
  SourceCharacterization sc_;
  SecurityParams sp_;
};

struct SweepOptions {
  bool parallel = false;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// One curve per configured n_max (ascending), then the Delta = 0 curve if enabled.
/// Throws DomainError naming the failing gamma comparison when a level is not
/// sub-Poissonian.
std::vector<Curve> run_sweep(const Scenario& scenario, const SweepOptions& opts = {});

struct ThresholdResult {
  enum class Kind { Found, NoKey, BeyondRange };
  Kind kind = Kind::NoKey;
  double km = 0.0;  ///< last distance with positive rate (Found/BeyondRange)

  bool found() const noexcept { return kind == Kind::Found; }
};

/// Scans the sweep grid for the first nonpositive rate and bisects back to the last
/// positive distance within `resolution_km`.
ThresholdResult threshold_search(const std::function<double(double)>& rate, const SweepSpec& sweep,
                                 double resolution_km = 0.1);

/// Threshold of a characterization level; empty n_max selects the Delta = 0 curve.
ThresholdResult threshold_distance(const Scenario& scenario, std::optional<std::size_t> n_max);

inline constexpr std::string_view kSweepCsvHeader =
    "distance_km,Q,Q_c,Q_nc,E_c,E_nc,G_c,G_nc,G_both,G,G_over_q,baseline_ideal,"
    "baseline_conventional,rule_of_thumb";

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out);
/// Throws std::runtime_error when the file cannot be written.
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

Scenario parse_config_text(std::string_view text);
/// Throws ConfigError (or std::runtime_error if the file cannot be read).
Scenario parse_config(const std::filesystem::path& path);
std::string emit_config(const Scenario& scenario);

/// Shortest decimal text that reads back to the same double.
std::string format_shortest(double v);

/// CSV cell: scientific notation with 16 significant digits; "nan", "inf", "-inf"
/// for non-finite values.
std::string format_csv_number(double v);

}  // namespace bsqkd
