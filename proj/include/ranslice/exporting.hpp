#pragma once

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranslice/config.hpp"
#include "ranslice/engine.hpp"
#include "ranslice/version.hpp"

namespace ranslice {

struct IoError : std::runtime_error {
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error("io error on " + path + ": " + what), path(path) {}
  std::string path;
};

namespace detail {

// Shortest round-trip formatting; keeps exports byte-stable and locale-free.
inline std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_file(const std::string& path, const std::string& content,
                       std::vector<std::string>* written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << content;
  if (!out) throw IoError(path, "write failed");
  if (written) written->push_back(path);
}

inline std::string ci_field(const MeanCi& ci, int sign) {
  if (!ci.ci_defined) return "";
  return fmt(ci.mean + sign * ci.ci_half_width);
}

}  // namespace detail

// ---- JSON bindings -------------------------------------------------------

inline void to_json(nlohmann::json& j, const MeanCi& m) {
  j = nlohmann::json{{"mean", m.mean}, {"ci_half_width", m.ci_half_width},
                     {"ci_defined", m.ci_defined}};
}

inline void from_json(const nlohmann::json& j, MeanCi& m) {
  j.at("mean").get_to(m.mean);
  j.at("ci_half_width").get_to(m.ci_half_width);
  j.at("ci_defined").get_to(m.ci_defined);
}

inline bool operator==(const MeanCi& a, const MeanCi& b) {
  return a.mean == b.mean && a.ci_half_width == b.ci_half_width && a.ci_defined == b.ci_defined;
}

inline void to_json(nlohmann::json& j, const RunKpis& r) {
  j = nlohmann::json{{"seed", r.seed},
                     {"urllc_latency_ms_mean", r.urllc_latency_ms_mean},
                     {"urllc_latency_count", r.urllc_latency_count},
                     {"embb_throughput_mbps", r.embb_throughput_mbps},
                     {"urllc_pdr", r.urllc_pdr},
                     {"embb_pdr", r.embb_pdr},
                     {"combined_pdr", r.combined_pdr},
                     {"urllc_pdr_defined", r.urllc_pdr_defined},
                     {"embb_pdr_defined", r.embb_pdr_defined},
                     {"combined_pdr_defined", r.combined_pdr_defined},
                     {"convergence_tti", r.convergence_tti},
                     {"urllc_reward_mean", r.urllc_reward_mean},
                     {"embb_reward_mean", r.embb_reward_mean},
                     {"window_urllc_arrivals", r.window_urllc_arrivals},
                     {"window_urllc_drops", r.window_urllc_drops},
                     {"window_embb_arrivals", r.window_embb_arrivals},
                     {"window_embb_drops", r.window_embb_drops}};
}

inline void from_json(const nlohmann::json& j, RunKpis& r) {
  j.at("seed").get_to(r.seed);
  j.at("urllc_latency_ms_mean").get_to(r.urllc_latency_ms_mean);
  j.at("urllc_latency_count").get_to(r.urllc_latency_count);
  j.at("embb_throughput_mbps").get_to(r.embb_throughput_mbps);
  j.at("urllc_pdr").get_to(r.urllc_pdr);
  j.at("embb_pdr").get_to(r.embb_pdr);
  j.at("combined_pdr").get_to(r.combined_pdr);
  j.at("urllc_pdr_defined").get_to(r.urllc_pdr_defined);
  j.at("embb_pdr_defined").get_to(r.embb_pdr_defined);
  j.at("combined_pdr_defined").get_to(r.combined_pdr_defined);
  j.at("convergence_tti").get_to(r.convergence_tti);
  j.at("urllc_reward_mean").get_to(r.urllc_reward_mean);
  j.at("embb_reward_mean").get_to(r.embb_reward_mean);
  j.at("window_urllc_arrivals").get_to(r.window_urllc_arrivals);
  j.at("window_urllc_drops").get_to(r.window_urllc_drops);
  j.at("window_embb_arrivals").get_to(r.window_embb_arrivals);
  j.at("window_embb_drops").get_to(r.window_embb_drops);
}

inline void to_json(nlohmann::json& j, const AggregateKpis& a) {
  j = nlohmann::json{{"urllc_latency_ms", a.urllc_latency_ms},
                     {"embb_throughput_mbps", a.embb_throughput_mbps},
                     {"combined_pdr", a.combined_pdr},
                     {"urllc_pdr", a.urllc_pdr},
                     {"embb_pdr", a.embb_pdr},
                     {"convergence_tti", a.convergence_tti}};
}

inline void from_json(const nlohmann::json& j, AggregateKpis& a) {
  j.at("urllc_latency_ms").get_to(a.urllc_latency_ms);
  j.at("embb_throughput_mbps").get_to(a.embb_throughput_mbps);
  j.at("combined_pdr").get_to(a.combined_pdr);
  j.at("urllc_pdr").get_to(a.urllc_pdr);
  j.at("embb_pdr").get_to(a.embb_pdr);
  j.at("convergence_tti").get_to(a.convergence_tti);
}

inline bool operator==(const AggregateKpis& a, const AggregateKpis& b) {
  return a.urllc_latency_ms == b.urllc_latency_ms &&
         a.embb_throughput_mbps == b.embb_throughput_mbps && a.combined_pdr == b.combined_pdr &&
         a.urllc_pdr == b.urllc_pdr && a.embb_pdr == b.embb_pdr &&
         a.convergence_tti == b.convergence_tti;
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"algorithm", to_string(r.algorithm)},
                     {"urllc_load_mbps", r.urllc_load_mbps},
                     {"embb_load_mbps", r.embb_load_mbps},
                     {"base_seed", r.base_seed},
                     {"runs", r.runs},
                     {"per_run", r.per_run},
                     {"aggregate", r.aggregate},
                     {"latency_hist", r.latency_hist},
                     {"urllc_reward_trace_mean", r.urllc_reward_trace_mean},
                     {"embb_reward_trace_mean", r.embb_reward_trace_mean}};
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  const auto algo = algorithm_from_string(j.at("algorithm").get<std::string>());
  if (!algo) throw std::invalid_argument("unknown algorithm in report");
  r.algorithm = *algo;
  j.at("urllc_load_mbps").get_to(r.urllc_load_mbps);
  j.at("embb_load_mbps").get_to(r.embb_load_mbps);
  j.at("base_seed").get_to(r.base_seed);
  j.at("runs").get_to(r.runs);
  j.at("per_run").get_to(r.per_run);
  j.at("aggregate").get_to(r.aggregate);
  j.at("latency_hist").get_to(r.latency_hist);
  j.at("urllc_reward_trace_mean").get_to(r.urllc_reward_trace_mean);
  j.at("embb_reward_trace_mean").get_to(r.embb_reward_trace_mean);
}

inline bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  return a.algorithm == b.algorithm && a.urllc_load_mbps == b.urllc_load_mbps &&
         a.embb_load_mbps == b.embb_load_mbps && a.base_seed == b.base_seed && a.runs == b.runs &&
         a.per_run == b.per_run && a.aggregate == b.aggregate &&
         a.latency_hist == b.latency_hist &&
         a.urllc_reward_trace_mean == b.urllc_reward_trace_mean &&
         a.embb_reward_trace_mean == b.embb_reward_trace_mean;
}

// ---- tidy CSV exports ------------------------------------------------------

enum class ExportFormat { kCsv, kJson, kBoth };

// One tidy table per figure-style metric: rows are (algorithm, urllc_load,
// metric, mean, ci_low, ci_high); CI fields stay empty for single runs.
inline std::vector<std::string> export_results(const std::vector<ExperimentReport>& reports,
                                               const std::string& out_dir,
                                               ExportFormat format = ExportFormat::kBoth) {
  if (reports.empty()) throw std::invalid_argument("export_results: no reports");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, ec.message());
  std::vector<std::string> written;
  using detail::ci_field;
  using detail::fmt;

  const bool csv = format == ExportFormat::kCsv || format == ExportFormat::kBoth;
  const bool json = format == ExportFormat::kJson || format == ExportFormat::kBoth;

  auto scalar_table = [&](const std::string& file, const std::string& metric,
                          auto value_of) {
    std::ostringstream os;
    os << "algorithm,urllc_load,metric,mean,ci_low,ci_high\n";
    for (const auto& r : reports) {
      const MeanCi ci = value_of(r);
      os << to_string(r.algorithm) << ',' << fmt(r.urllc_load_mbps) << ',' << metric << ','
         << fmt(ci.mean) << ',' << ci_field(ci, -1) << ',' << ci_field(ci, +1) << '\n';
    }
    detail::write_file(out_dir + "/" + file, os.str(), &written);
  };

  if (csv) {
    scalar_table("urllc_latency_vs_load.csv", "urllc_latency_ms",
                 [](const ExperimentReport& r) { return r.aggregate.urllc_latency_ms; });
    scalar_table("embb_throughput_vs_load.csv", "embb_throughput_mbps",
                 [](const ExperimentReport& r) { return r.aggregate.embb_throughput_mbps; });
    {
      std::ostringstream os;
      os << "algorithm,urllc_load,metric,mean,ci_low,ci_high\n";
      for (const auto& r : reports) {
        const struct { const char* name; const MeanCi* ci; } rows[] = {
            {"pdr_combined", &r.aggregate.combined_pdr},
            {"pdr_urllc", &r.aggregate.urllc_pdr},
            {"pdr_embb", &r.aggregate.embb_pdr}};
        for (const auto& row : rows)
          os << to_string(r.algorithm) << ',' << fmt(r.urllc_load_mbps) << ',' << row.name << ','
             << fmt(row.ci->mean) << ',' << ci_field(*row.ci, -1) << ',' << ci_field(*row.ci, +1)
             << '\n';
      }
      detail::write_file(out_dir + "/pdr_vs_load.csv", os.str(), &written);
    }
    scalar_table("convergence_vs_load.csv", "convergence_tti",
                 [](const ExperimentReport& r) { return r.aggregate.convergence_tti; });
    {
      std::ostringstream os;
      os << "algorithm,urllc_load,bin_low_ms,bin_high_ms,count\n";
      const double bin_width = kHistMaxMs / kHistBins;
      for (const auto& r : reports) {
        for (int b = 0; b <= kHistBins; ++b) {
          os << to_string(r.algorithm) << ',' << fmt(r.urllc_load_mbps) << ','
             << fmt(b * bin_width) << ','
             << (b == kHistBins ? "inf" : fmt((b + 1) * bin_width)) << ',' << r.latency_hist[b]
             << '\n';
        }
      }
      detail::write_file(out_dir + "/latency_histogram.csv", os.str(), &written);
    }
    {
      std::ostringstream os;
      os << "algorithm,urllc_load,tti,urllc_reward,embb_reward\n";
      for (const auto& r : reports) {
        for (std::size_t t = 0; t < r.urllc_reward_trace_mean.size(); ++t)
          os << to_string(r.algorithm) << ',' << fmt(r.urllc_load_mbps) << ',' << (t + 1) << ','
             << fmt(r.urllc_reward_trace_mean[t]) << ',' << fmt(r.embb_reward_trace_mean[t])
             << '\n';
      }
      detail::write_file(out_dir + "/reward_trace.csv", os.str(), &written);
    }
    {
      std::ostringstream os;
      os << "algorithm,urllc_load,run,seed,convergence_tti,urllc_latency_ms,embb_throughput_mbps,"
            "pdr_combined\n";
      for (const auto& r : reports) {
        for (std::size_t k = 0; k < r.per_run.size(); ++k) {
          const auto& run = r.per_run[k];
          os << to_string(r.algorithm) << ',' << fmt(r.urllc_load_mbps) << ',' << k << ','
             << run.seed << ',' << run.convergence_tti << ',' << fmt(run.urllc_latency_ms_mean)
             << ',' << fmt(run.embb_throughput_mbps) << ',' << fmt(run.combined_pdr) << '\n';
        }
      }
      detail::write_file(out_dir + "/per_run.csv", os.str(), &written);
    }
  }
  if (json) {
    nlohmann::json j = reports;
    detail::write_file(out_dir + "/reports.json", j.dump(2) + "\n", &written);
  }
  return written;
}

// ---- packet / agent traces -------------------------------------------------

inline std::string packet_trace_csv(const std::vector<Packet>& log, double tti_ms) {
  std::ostringstream os;
  os << "id,ue,arrival_tti,completion_tti,d_que_ms,d_tx_ms,d_rtx_ms,total_ms,retx,dropped\n";
  for (const auto& p : log) {
    os << p.id << ',' << p.ue << ',' << p.arrival_tti << ','
       << (p.completion_tti >= 0 ? std::to_string(p.completion_tti) : "") << ','
       << detail::fmt(p.d_que_ms(tti_ms)) << ',' << detail::fmt(p.d_tx_ms(tti_ms)) << ','
       << detail::fmt(p.d_rtx_ms(tti_ms)) << ',' << detail::fmt(p.total_delay_ms(tti_ms)) << ','
       << p.retx_count << ',' << (p.dropped ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string agent_trace_csv(const std::vector<AgentTraceRow>& log) {
  std::ostringstream os;
  os << "tti,cell,state_urllc,action_urllc,reward_urllc,state_embb,action_embb,reward_embb\n";
  for (const auto& row : log) {
    os << row.tti << ',' << row.cell << ',' << row.state_urllc << ',' << row.action_urllc << ','
       << detail::fmt(row.reward_urllc) << ',' << row.state_embb << ',' << row.action_embb << ','
       << detail::fmt(row.reward_embb) << '\n';
  }
  return os.str();
}

// ---- manifest + sweep ------------------------------------------------------

struct RunManifest {
  std::string config_text;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> files;
  std::vector<std::string> errors;
  std::string version = kVersion;
  double duration_s = 0.0;
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"config", m.config_text}, {"seeds", m.seeds},   {"files", m.files},
                     {"errors", m.errors},      {"version", m.version}, {"duration_s", m.duration_s}};
}

struct SweepOptions {
  bool trace_logs = false;       // per-run packet + agent trace CSVs
  bool topology_dumps = true;    // per-run topology text artifacts
  ExportFormat format = ExportFormat::kBoth;
};

struct SweepOutcome {
  std::vector<ExperimentReport> reports;
  RunManifest manifest;
};

// Full cross product of loads x algorithms; per-point failures are recorded
// in the manifest without aborting the remaining grid.
inline SweepOutcome sweep(const SimConfig& base, std::vector<double> loads,
                          const std::vector<Algorithm>& algorithms, const std::string& out_dir,
                          const SweepOptions& options = {}) {
  if (loads.empty() || algorithms.empty())
    throw std::invalid_argument("sweep: loads and algorithms must be non-empty");
  const auto start = std::chrono::steady_clock::now();
  SweepOutcome outcome;
  outcome.manifest.config_text = config_to_text(base);

  // deduplicate loads, preserving first occurrence order
  {
    std::vector<double> unique;
    for (double load : loads) {
      bool seen = false;
      for (double u : unique) seen |= (u == load);
      if (seen)
        outcome.manifest.errors.push_back("warning: duplicate load " +
                                          detail::fmt(load) + " ignored");
      else
        unique.push_back(load);
    }
    loads = std::move(unique);
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, ec.message());
  if (options.topology_dumps) fs::create_directories(out_dir + "/topology", ec);
  if (options.trace_logs) fs::create_directories(out_dir + "/traces", ec);

  for (Algorithm algo : algorithms) {
    for (double load : loads) {
      SimConfig point = base;
      point.algorithm = algo;
      point.urllc_load_mbps = load;
      const std::string tag =
          std::string(to_string(algo)) + "_load" + detail::fmt(load);
      try {
        std::vector<EpisodeResult> episodes;
        const bool want_episodes = options.topology_dumps || options.trace_logs;
        ExperimentReport report = run_experiment(
            point, nullptr, want_episodes ? &episodes : nullptr, options.trace_logs);
        for (std::size_t k = 0; k < episodes.size(); ++k) {
          if (options.topology_dumps)
            detail::write_file(out_dir + "/topology/" + tag + "_run" + std::to_string(k) + ".txt",
                               episodes[k].topology_text, &outcome.manifest.files);
          if (options.trace_logs) {
            detail::write_file(
                out_dir + "/traces/packet_" + tag + "_run" + std::to_string(k) + ".csv",
                packet_trace_csv(episodes[k].packet_log, point.tti_ms), &outcome.manifest.files);
            detail::write_file(
                out_dir + "/traces/agent_" + tag + "_run" + std::to_string(k) + ".csv",
                agent_trace_csv(episodes[k].agent_log), &outcome.manifest.files);
          }
        }
        for (const auto& r : report.per_run) outcome.manifest.seeds.push_back(r.seed);
        outcome.reports.push_back(std::move(report));
      } catch (const std::exception& e) {
        outcome.manifest.errors.push_back(tag + ": " + e.what());
      }
    }
  }

  if (!outcome.reports.empty()) {
    const auto files = export_results(outcome.reports, out_dir, options.format);
    outcome.manifest.files.insert(outcome.manifest.files.end(), files.begin(), files.end());
  }
  outcome.manifest.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    nlohmann::json j = outcome.manifest;
    detail::write_file(out_dir + "/manifest.json", j.dump(2) + "\n", nullptr);
  }
  return outcome;
}

}  // namespace ranslice
