// Scenario files: INI-style sections of `key = value` lines. Blank lines and
// lines starting with '#' or ';' are ignored. Lists are comma separated.
// The full schema is documented in README.md.

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bsqkd/error.hpp"
#include "bsqkd/experiment.hpp"

namespace bsqkd {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

// "section.key" -> entry
using Table = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"source", {"model", "p0_sp", "p1_sp", "nu", "mu", "probs"}},
      {"monitor", {"R", "eta_M", "d_M"}},
      {"channel", {"alpha", "e_det", "eta_B", "d_det", "n_det"}},
      {"security", {"q", "f", "grid_points"}},
      {"characterization", {"n_max", "include_full", "absorb_unwanted"}},
      {"sweep", {"l_min", "l_max", "step"}},
      {"montecarlo", {"n_pulses", "seed", "distances"}},
  };
  return s;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(Table t) : table_(std::move(t)) {}

  bool has(const std::string& key) const { return table_.count(key) != 0; }

  const Entry& entry(const std::string& key) const {
    const auto it = table_.find(key);
    if (it == table_.end()) throw ConfigError(key, 0, "missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double number(const std::string& key) const { return parse_double(key, entry(key)); }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t integer(const std::string& key) const { return parse_uint(key, entry(key)); }
  std::uint64_t integer_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entry(key);
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw bad(key, e, "expected true or false");
  }

  std::vector<double> number_list(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<double> out;
    for (auto item : split_list(e.value)) out.push_back(parse_double(key, {std::string(item), e.line}));
    return out;
  }

  std::vector<std::size_t> size_list(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<std::size_t> out;
    if (e.value.empty()) return out;
    for (auto item : split_list(e.value)) {
      out.push_back(static_cast<std::size_t>(parse_uint(key, {std::string(item), e.line})));
    }
    return out;
  }

  std::string text(const std::string& key) const { return entry(key).value; }

  int line_of(const std::string& key) const { return has(key) ? table_.at(key).line : 0; }

  // Keys that are valid in the schema but were never consumed, e.g. `mu` for a
  // model that takes no mean.
  void reject_unused() const {
    for (const auto& [key, e] : table_) {
      if (!used_.count(key)) {
        throw ConfigError(key, e.line,
                          fmt::format("line {}: key '{}' does not apply to this scenario", e.line,
                                      key));
      }
    }
  }

  static ConfigError bad(const std::string& key, const Entry& e, const std::string& why) {
    return ConfigError(key, e.line,
                       fmt::format("line {}: invalid value '{}' for '{}': {}", e.line, e.value,
                                   key, why));
  }

 private:
  static double parse_double(const std::string& key, const Entry& e) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || e.value.empty()) throw bad(key, e, "expected a number");
    return v;
  }

  static std::uint64_t parse_uint(const std::string& key, const Entry& e) {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || e.value.empty()) {
      throw bad(key, e, "expected a nonnegative integer");
    }
    return v;
  }

  Table table_;
  mutable std::set<std::string> used_;
};

Table tokenize(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(std::string(line), line_no,
                          fmt::format("line {}: malformed section header '{}'", line_no, line));
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!schema().count(section)) {
        throw ConfigError(section, line_no,
                          fmt::format("line {}: unknown section [{}]", line_no, section));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), line_no,
                        fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (section.empty()) {
      throw ConfigError(key, line_no,
                        fmt::format("line {}: key '{}' appears before any section", line_no, key));
    }
    const std::string full = section + "." + key;
    if (!schema().at(section).count(key)) {
      throw ConfigError(full, line_no, fmt::format("line {}: unknown key '{}'", line_no, full));
    }
    if (table.count(full)) {
      throw ConfigError(full, line_no, fmt::format("line {}: duplicate key '{}'", line_no, full));
    }
    table.emplace(full, Entry{value, line_no});
  }
  return table;
}

SourceModel parse_model(const Reader& r) {
  const std::string key = "source.model";
  const auto name = r.text(key);
  for (auto m : {SourceModel::SpsLossBackground, SourceModel::Poissonian, SourceModel::Thermal,
                 SourceModel::HeraldedThermal, SourceModel::Custom}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError(key, r.line_of(key),
                    fmt::format("line {}: unknown source model '{}'", r.line_of(key), name));
}

}  // namespace

void Scenario::validate() const {
  auto fail = [](const char* key, const std::string& why) {
    throw ConfigError(key, 0, fmt::format("invalid scenario: {}: {}", key, why));
  };
  try {
    monitor.validate();
  } catch (const DomainError& e) {
    fail("monitor", e.what());
  }
  try {
    channel.validate();
  } catch (const DomainError& e) {
    fail("channel", e.what());
  }
  if (!(q > 0.0 && q <= 1.0)) fail("security.q", "must lie in (0, 1]");
  if (!(f >= 1.0)) fail("security.f", "must be at least 1");
  if (grid_points < 2) fail("security.grid_points", "must be at least 2");
  for (std::size_t n : n_max) {
    if (n < 2) fail("characterization.n_max", "entries must be at least 2");
  }
  if (n_max.empty() && !include_full) fail("characterization", "no curve requested");
  if (!(sweep.l_min >= 0.0)) fail("sweep.l_min", "must be nonnegative");
  if (!(sweep.step > 0.0)) fail("sweep.step", "must be positive");
  if (!(sweep.l_max >= sweep.l_min)) fail("sweep.l_max", "must not be below l_min");
  if (montecarlo && montecarlo->n_pulses == 0) fail("montecarlo.n_pulses", "must be positive");
}

Scenario parse_config_text(std::string_view text) {
  const Reader r(tokenize(text));
  Scenario s;

  s.source.model = parse_model(r);
  switch (s.source.model) {
    case SourceModel::SpsLossBackground:
      s.source.p0_sp = r.number("source.p0_sp");
      s.source.p1_sp = r.number("source.p1_sp");
      s.source.nu = r.number("source.nu");
      break;
    case SourceModel::Poissonian:
    case SourceModel::Thermal:
    case SourceModel::HeraldedThermal:
      s.source.mu = r.number("source.mu");
      break;
    case SourceModel::Custom:
      s.source.probs = r.number_list("source.probs");
      break;
  }

  s.monitor.R = r.number("monitor.R");
  s.monitor.eta_M = r.number("monitor.eta_M");
  s.monitor.d_M = r.number("monitor.d_M");

  s.channel.alpha = r.number("channel.alpha");
  s.channel.e_det = r.number("channel.e_det");
  s.channel.eta_B = r.number("channel.eta_B");
  s.channel.d_det = r.number("channel.d_det");
  s.channel.n_det = static_cast<int>(r.integer("channel.n_det"));

  s.q = r.number_or("security.q", s.q);
  s.f = r.number_or("security.f", s.f);
  s.grid_points = r.integer_or("security.grid_points", s.grid_points);

  if (r.has("characterization.n_max")) s.n_max = r.size_list("characterization.n_max");
  s.include_full = r.boolean_or("characterization.include_full", s.include_full);
  s.absorb_unwanted = r.boolean_or("characterization.absorb_unwanted", s.absorb_unwanted);

  s.sweep.l_min = r.number_or("sweep.l_min", s.sweep.l_min);
  s.sweep.l_max = r.number_or("sweep.l_max", s.sweep.l_max);
  s.sweep.step = r.number_or("sweep.step", s.sweep.step);

  const bool any_mc = r.has("montecarlo.n_pulses") || r.has("montecarlo.seed") ||
                      r.has("montecarlo.distances");
  if (any_mc) {
    MonteCarloSpec mc;
    mc.n_pulses = r.integer_or("montecarlo.n_pulses", mc.n_pulses);
    mc.seed = r.integer_or("montecarlo.seed", mc.seed);
    if (r.has("montecarlo.distances")) mc.distances = r.number_list("montecarlo.distances");
    s.montecarlo = mc;
  }

  r.reject_unused();
  s.validate();
  return s;
}

Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string emit_config(const Scenario& s) {
  auto num = [](double v) { return format_shortest(v); };
  auto join = [](const auto& items, auto&& fmt_one) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += fmt_one(items[i]);
    }
    return out;
  };

  std::string out;
  out += "[source]\n";
  out += fmt::format("model = {}\n", to_string(s.source.model));
  switch (s.source.model) {
    case SourceModel::SpsLossBackground:
      out += fmt::format("p0_sp = {}\np1_sp = {}\nnu = {}\n", num(s.source.p0_sp),
                         num(s.source.p1_sp), num(s.source.nu));
      break;
    case SourceModel::Poissonian:
    case SourceModel::Thermal:
    case SourceModel::HeraldedThermal:
      out += fmt::format("mu = {}\n", num(s.source.mu));
      break;
    case SourceModel::Custom:
      out += fmt::format("probs = {}\n", join(s.source.probs, num));
      break;
  }
  out += fmt::format("\n[monitor]\nR = {}\neta_M = {}\nd_M = {}\n", num(s.monitor.R),
                     num(s.monitor.eta_M), num(s.monitor.d_M));
  out += fmt::format("\n[channel]\nalpha = {}\ne_det = {}\neta_B = {}\nd_det = {}\nn_det = {}\n",
                     num(s.channel.alpha), num(s.channel.e_det), num(s.channel.eta_B),
                     num(s.channel.d_det), s.channel.n_det);
  out += fmt::format("\n[security]\nq = {}\nf = {}\ngrid_points = {}\n", num(s.q), num(s.f),
                     s.grid_points);
  out += fmt::format("\n[characterization]\nn_max = {}\n",
                     join(s.n_max, [](std::size_t n) { return std::to_string(n); }));
  out += fmt::format("include_full = {}\nabsorb_unwanted = {}\n", s.include_full,
                     s.absorb_unwanted);
  out += fmt::format("\n[sweep]\nl_min = {}\nl_max = {}\nstep = {}\n", num(s.sweep.l_min),
                     num(s.sweep.l_max), num(s.sweep.step));
  if (s.montecarlo) {
    out += fmt::format("\n[montecarlo]\nn_pulses = {}\nseed = {}\ndistances = {}\n",
                       s.montecarlo->n_pulses, s.montecarlo->seed,
                       join(s.montecarlo->distances, num));
  }
  return out;
}

}  // namespace bsqkd
