#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/engine.hpp"

namespace ranslice {

enum class ConfigErrorKind { kMissingFile, kUnknownKey, kOutOfRange, kBadValue };

inline const char* to_string(ConfigErrorKind k) {
  switch (k) {
    case ConfigErrorKind::kMissingFile: return "MISSING_FILE";
    case ConfigErrorKind::kUnknownKey: return "UNKNOWN_KEY";
    case ConfigErrorKind::kOutOfRange: return "OUT_OF_RANGE";
    case ConfigErrorKind::kBadValue: return "BAD_VALUE";
  }
  return "?";
}

struct ConfigError : std::runtime_error {
  ConfigError(ConfigErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind(kind) {}
  ConfigErrorKind kind;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(ConfigErrorKind::kBadValue, key + " expects a number, got '" + value + "'");
  }
}

inline long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(ConfigErrorKind::kBadValue, key + " expects an integer, got '" + value + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(ConfigErrorKind::kBadValue, key + " expects an integer, got '" + value + "'");
  }
}

inline void range_fail(const std::string& key, const std::string& range) {
  throw ConfigError(ConfigErrorKind::kOutOfRange, key + " \xE2\x88\x88 " + range);
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "sim.cells",          "sim.inter_site_m",     "sim.cell_radius_m",
      "sim.min_distance_m", "sim.embb_ues",         "sim.urllc_ues",
      "sim.rbs",            "sim.rb_groups",        "sim.rb_bandwidth_hz",
      "sim.tti_ms",         "sim.horizon_ttis",     "sim.exploration_ttis",
      "sim.algorithm",      "sim.seed",             "sim.runs",
      "learn.alpha",        "learn.gamma",          "learn.epsilon",
      "traffic.urllc_load_mbps", "traffic.embb_load_mbps",
      "traffic.urllc_cbr_fraction", "traffic.packet_bits",
      "radio.tx_power_dbm", "radio.noise_dbm_hz",   "radio.antenna_gain_db",
      "radio.shadowing_sigma_db",
      "queue.urllc_deadline_ms", "queue.embb_deadline_ms", "queue.drop_penalty",
      "harq.bler_k",        "harq.bler_sinr_min",   "harq.rtt_ttis",
      "harq.max_retx",      "sched.pf_beta",        "sched.lrtq_urllc_weight",
      "agents.bucket_edges"};
  return keys;
}

// Apply one key=value pair with range validation.
inline void apply_config_key(SimConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_long;
  using detail::parse_u64;
  using detail::range_fail;
  auto positive_long = [&](const char* range) {
    const long v = parse_long(key, value);
    if (v < 1) range_fail(key, range);
    return v;
  };
  if (key == "sim.cells") c.radio.num_cells = static_cast<int>(positive_long(">= 1"));
  else if (key == "sim.inter_site_m") {
    c.radio.inter_site_m = parse_double(key, value);
    if (c.radio.inter_site_m <= 0) range_fail(key, "(0, inf)");
  } else if (key == "sim.cell_radius_m") {
    c.radio.cell_radius_m = parse_double(key, value);
    if (c.radio.cell_radius_m <= 0) range_fail(key, "(0, inf)");
  } else if (key == "sim.min_distance_m") {
    c.radio.min_distance_m = parse_double(key, value);
    if (c.radio.min_distance_m < 0) range_fail(key, "[0, inf)");
  } else if (key == "sim.embb_ues") c.radio.embb_ues_per_cell = static_cast<int>(positive_long(">= 1"));
  else if (key == "sim.urllc_ues") c.radio.urllc_ues_per_cell = static_cast<int>(positive_long(">= 1"));
  else if (key == "sim.rbs") c.radio.num_rbs = static_cast<int>(positive_long(">= 1"));
  else if (key == "sim.rb_groups") c.radio.num_groups = static_cast<int>(positive_long(">= 1"));
  else if (key == "sim.rb_bandwidth_hz") {
    c.radio.rb_bandwidth_hz = parse_double(key, value);
    if (c.radio.rb_bandwidth_hz <= 0) range_fail(key, "(0, inf)");
  } else if (key == "sim.tti_ms") {
    c.tti_ms = parse_double(key, value);
    if (c.tti_ms <= 0) range_fail(key, "(0, inf)");
  } else if (key == "sim.horizon_ttis") c.horizon_ttis = positive_long(">= 1");
  else if (key == "sim.exploration_ttis") {
    c.exploration_ttis = parse_long(key, value);
    if (c.exploration_ttis < 0) range_fail(key, "[0, horizon]");
  } else if (key == "sim.algorithm") {
    const auto algo = algorithm_from_string(value);
    if (!algo) range_fail(key, "{coqra, nql, lrtq, ppf}");
    c.algorithm = *algo;
  } else if (key == "sim.seed") c.seed = parse_u64(key, value);
  else if (key == "sim.runs") c.runs = static_cast<int>(positive_long(">= 1"));
  else if (key == "learn.alpha") {
    c.alpha = parse_double(key, value);
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) range_fail(key, "(0,1]");
  } else if (key == "learn.gamma") {
    c.gamma = parse_double(key, value);
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) range_fail(key, "[0,1)");
  } else if (key == "learn.epsilon") {
    c.epsilon = parse_double(key, value);
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) range_fail(key, "(0,1)");
  } else if (key == "traffic.urllc_load_mbps") {
    c.urllc_load_mbps = parse_double(key, value);
    if (c.urllc_load_mbps < 0) range_fail(key, "[0, inf)");
  } else if (key == "traffic.embb_load_mbps") {
    c.embb_load_mbps = parse_double(key, value);
    if (c.embb_load_mbps < 0) range_fail(key, "[0, inf)");
  } else if (key == "traffic.urllc_cbr_fraction") {
    c.urllc_cbr_fraction = parse_double(key, value);
    if (c.urllc_cbr_fraction < 0.0 || c.urllc_cbr_fraction > 1.0) range_fail(key, "[0,1]");
  } else if (key == "traffic.packet_bits") c.packet_bits = static_cast<int>(positive_long(">= 1"));
  else if (key == "radio.tx_power_dbm") c.radio.tx_power_dbm = parse_double(key, value);
  else if (key == "radio.noise_dbm_hz") c.radio.noise_dbm_hz = parse_double(key, value);
  else if (key == "radio.antenna_gain_db") c.radio.antenna_gain_db = parse_double(key, value);
  else if (key == "radio.shadowing_sigma_db") {
    c.radio.shadowing_sigma_db = parse_double(key, value);
    if (c.radio.shadowing_sigma_db < 0) range_fail(key, "[0, inf)");
  } else if (key == "queue.urllc_deadline_ms") {
    c.urllc_deadline_ms = parse_double(key, value);
    if (c.urllc_deadline_ms <= 0) range_fail(key, "(0, inf)");
  } else if (key == "queue.embb_deadline_ms") {
    c.embb_deadline_ms = parse_double(key, value);
    if (c.embb_deadline_ms <= 0) range_fail(key, "(0, inf)");
  } else if (key == "queue.drop_penalty") {
    c.drop_penalty = parse_double(key, value);
    if (c.drop_penalty < 0) range_fail(key, "[0, inf)");
  } else if (key == "harq.bler_k") {
    c.harq.bler_k = parse_double(key, value);
    if (c.harq.bler_k < 0) range_fail(key, "[0, inf)");
  } else if (key == "harq.bler_sinr_min") c.harq.bler_sinr_min = parse_double(key, value);
  else if (key == "harq.rtt_ttis") {
    c.harq.rtt_ttis = static_cast<int>(parse_long(key, value));
    if (c.harq.rtt_ttis < 0) range_fail(key, "[0, inf)");
  } else if (key == "harq.max_retx") {
    c.harq.max_retx = static_cast<int>(parse_long(key, value));
    if (c.harq.max_retx < 0) range_fail(key, "[0, inf)");
  } else if (key == "sched.pf_beta") {
    c.pf_beta = parse_double(key, value);
    if (!(c.pf_beta > 0.0 && c.pf_beta <= 1.0)) range_fail(key, "(0,1]");
  } else if (key == "sched.lrtq_urllc_weight") {
    c.lrtq_urllc_weight = parse_double(key, value);
    if (c.lrtq_urllc_weight < 0.0 || c.lrtq_urllc_weight > 1.0) range_fail(key, "[0,1]");
  } else if (key == "agents.bucket_edges") {
    std::vector<long> edges;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) edges.push_back(parse_long(key, item));
    if (edges.empty() || edges.front() != 0) range_fail(key, "comma list starting at 0");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (edges[i] <= edges[i - 1]) range_fail(key, "strictly increasing comma list");
    c.bucket_edges = std::move(edges);
  } else {
    throw ConfigError(ConfigErrorKind::kUnknownKey, key);
  }
}

// Flat key=value text, '#' comments, blank lines ignored.
inline void apply_config_text(SimConfig& c, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigErrorKind::kBadValue,
                        "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_config_key(c, key, value);
  }
}

// Environment overrides for CI: RANSLICE_SIM_SEED=7 sets sim.seed, etc.
inline std::string env_name_for_key(const std::string& key) {
  std::string name = "RANSLICE_";
  for (char ch : key) name += (ch == '.') ? '_' : static_cast<char>(std::toupper(ch));
  return name;
}

inline void apply_env_overrides(SimConfig& c) {
  for (const auto& key : config_keys()) {
    const char* value = std::getenv(env_name_for_key(key).c_str());
    if (value) apply_config_key(c, key, value);
  }
}

inline SimConfig parse_config_file(const std::string& path, bool env_overrides = true) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorKind::kMissingFile, path);
  std::ostringstream buf;
  buf << in.rdbuf();
  SimConfig config;
  apply_config_text(config, buf.str());
  if (env_overrides) apply_env_overrides(config);
  return config;
}

// Lossless snapshot; parsing it back reproduces the config exactly.
inline std::string config_to_text(const SimConfig& c) {
  using detail::format_double;
  std::ostringstream os;
  os << "sim.cells = " << c.radio.num_cells << "\n";
  os << "sim.inter_site_m = " << format_double(c.radio.inter_site_m) << "\n";
  os << "sim.cell_radius_m = " << format_double(c.radio.cell_radius_m) << "\n";
  os << "sim.min_distance_m = " << format_double(c.radio.min_distance_m) << "\n";
  os << "sim.embb_ues = " << c.radio.embb_ues_per_cell << "\n";
  os << "sim.urllc_ues = " << c.radio.urllc_ues_per_cell << "\n";
  os << "sim.rbs = " << c.radio.num_rbs << "\n";
  os << "sim.rb_groups = " << c.radio.num_groups << "\n";
  os << "sim.rb_bandwidth_hz = " << format_double(c.radio.rb_bandwidth_hz) << "\n";
  os << "sim.tti_ms = " << format_double(c.tti_ms) << "\n";
  os << "sim.horizon_ttis = " << c.horizon_ttis << "\n";
  os << "sim.exploration_ttis = " << c.exploration_ttis << "\n";
  os << "sim.algorithm = " << to_string(c.algorithm) << "\n";
  os << "sim.seed = " << c.seed << "\n";
  os << "sim.runs = " << c.runs << "\n";
  os << "learn.alpha = " << format_double(c.alpha) << "\n";
  os << "learn.gamma = " << format_double(c.gamma) << "\n";
  os << "learn.epsilon = " << format_double(c.epsilon) << "\n";
  os << "traffic.urllc_load_mbps = " << format_double(c.urllc_load_mbps) << "\n";
  os << "traffic.embb_load_mbps = " << format_double(c.embb_load_mbps) << "\n";
  os << "traffic.urllc_cbr_fraction = " << format_double(c.urllc_cbr_fraction) << "\n";
  os << "traffic.packet_bits = " << c.packet_bits << "\n";
  os << "radio.tx_power_dbm = " << format_double(c.radio.tx_power_dbm) << "\n";
  os << "radio.noise_dbm_hz = " << format_double(c.radio.noise_dbm_hz) << "\n";
  os << "radio.antenna_gain_db = " << format_double(c.radio.antenna_gain_db) << "\n";
  os << "radio.shadowing_sigma_db = " << format_double(c.radio.shadowing_sigma_db) << "\n";
  os << "queue.urllc_deadline_ms = " << format_double(c.urllc_deadline_ms) << "\n";
  os << "queue.embb_deadline_ms = " << format_double(c.embb_deadline_ms) << "\n";
  os << "queue.drop_penalty = " << format_double(c.drop_penalty) << "\n";
  os << "harq.bler_k = " << format_double(c.harq.bler_k) << "\n";
  os << "harq.bler_sinr_min = " << format_double(c.harq.bler_sinr_min) << "\n";
  os << "harq.rtt_ttis = " << c.harq.rtt_ttis << "\n";
  os << "harq.max_retx = " << c.harq.max_retx << "\n";
  os << "sched.pf_beta = " << format_double(c.pf_beta) << "\n";
  os << "sched.lrtq_urllc_weight = " << format_double(c.lrtq_urllc_weight) << "\n";
  os << "agents.bucket_edges = ";
  for (std::size_t i = 0; i < c.bucket_edges.size(); ++i)
    os << c.bucket_edges[i] << (i + 1 < c.bucket_edges.size() ? "," : "");
  os << "\n";
  return os.str();
}

inline bool operator==(const RadioParams& a, const RadioParams& b) {
  return a.num_cells == b.num_cells && a.inter_site_m == b.inter_site_m &&
         a.cell_radius_m == b.cell_radius_m && a.min_distance_m == b.min_distance_m &&
         a.embb_ues_per_cell == b.embb_ues_per_cell &&
         a.urllc_ues_per_cell == b.urllc_ues_per_cell && a.num_rbs == b.num_rbs &&
         a.num_groups == b.num_groups && a.rb_bandwidth_hz == b.rb_bandwidth_hz &&
         a.tx_power_dbm == b.tx_power_dbm && a.noise_dbm_hz == b.noise_dbm_hz &&
         a.antenna_gain_db == b.antenna_gain_db && a.shadowing_sigma_db == b.shadowing_sigma_db;
}

inline bool operator==(const HarqParams& a, const HarqParams& b) {
  return a.bler_k == b.bler_k && a.bler_sinr_min == b.bler_sinr_min &&
         a.rtt_ttis == b.rtt_ttis && a.max_retx == b.max_retx;
}

inline bool operator==(const SimConfig& a, const SimConfig& b) {
  return a.radio == b.radio && a.tti_ms == b.tti_ms && a.horizon_ttis == b.horizon_ttis &&
         a.exploration_ttis == b.exploration_ttis && a.alpha == b.alpha && a.gamma == b.gamma &&
         a.epsilon == b.epsilon && a.urllc_load_mbps == b.urllc_load_mbps &&
         a.embb_load_mbps == b.embb_load_mbps && a.urllc_cbr_fraction == b.urllc_cbr_fraction &&
         a.packet_bits == b.packet_bits && a.urllc_deadline_ms == b.urllc_deadline_ms &&
         a.embb_deadline_ms == b.embb_deadline_ms && a.drop_penalty == b.drop_penalty &&
         a.harq == b.harq && a.pf_beta == b.pf_beta &&
         a.lrtq_urllc_weight == b.lrtq_urllc_weight && a.bucket_edges == b.bucket_edges &&
         a.algorithm == b.algorithm && a.seed == b.seed && a.runs == b.runs;
}

}  // namespace ranslice
