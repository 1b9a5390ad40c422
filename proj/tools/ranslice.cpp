// Command-line front end: single experiments and figure-grid sweeps.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranslice/config.hpp"
#include "ranslice/engine.hpp"
#include "ranslice/exporting.hpp"
#include "ranslice/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string config_path;
  std::string algorithm;
  double urllc_load = -1.0;
  double embb_load = -1.0;
  std::int64_t seed = -1;
  int runs = -1;
  std::string out_dir = "out";
  bool packet_trace = false;
};

ranslice::SimConfig resolve_config(const CommonFlags& flags) {
  ranslice::SimConfig config;
  if (!flags.config_path.empty()) {
    config = ranslice::parse_config_file(flags.config_path);
  } else {
    ranslice::apply_env_overrides(config);
  }
  // CLI flags take precedence over file and environment values
  if (!flags.algorithm.empty())
    ranslice::apply_config_key(config, "sim.algorithm", flags.algorithm);
  if (flags.urllc_load >= 0.0)
    ranslice::apply_config_key(config, "traffic.urllc_load_mbps", std::to_string(flags.urllc_load));
  if (flags.embb_load >= 0.0)
    ranslice::apply_config_key(config, "traffic.embb_load_mbps", std::to_string(flags.embb_load));
  if (flags.seed >= 0)
    ranslice::apply_config_key(config, "sim.seed", std::to_string(flags.seed));
  if (flags.runs >= 0) ranslice::apply_config_key(config, "sim.runs", std::to_string(flags.runs));
  ranslice::validate_config(config);
  return config;
}

void print_report(const ranslice::ExperimentReport& report) {
  const auto& agg = report.aggregate;
  std::printf("%-6s load=%.3g Mbps  latency=%.4f ms (±%.4f)  throughput=%.4f Mbps (±%.4f)  "
              "pdr=%.5f (±%.5f)  convergence=%.0f\n",
              ranslice::to_string(report.algorithm), report.urllc_load_mbps,
              agg.urllc_latency_ms.mean, agg.urllc_latency_ms.ci_half_width,
              agg.embb_throughput_mbps.mean, agg.embb_throughput_mbps.ci_half_width,
              agg.combined_pdr.mean, agg.combined_pdr.ci_half_width, agg.convergence_tti.mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranslice: multi-cell downlink RAN slicing simulator"};
  app.set_version_flag("--version", ranslice::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  std::string loads_csv = "1,2,3";
  std::string algos_csv = "coqra,nql,lrtq,ppf";

  auto add_common = [&flags](CLI::App* cmd, bool with_algo) {
    cmd->add_option("--config", flags.config_path, "flat key=value config file");
    if (with_algo)
      cmd->add_option("--algorithm", flags.algorithm, "coqra | nql | lrtq | ppf");
    cmd->add_option("--urllc-load", flags.urllc_load, "URLLC offered load, Mbps per cell");
    cmd->add_option("--embb-load", flags.embb_load, "eMBB offered load, Mbps per cell");
    cmd->add_option("--seed", flags.seed, "base seed");
    cmd->add_option("--runs", flags.runs, "independent runs per experiment");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_flag("--packet-trace", flags.packet_trace,
                  "write per-run packet and agent trace CSVs");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  add_common(run_cmd, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a loads x algorithms grid");
  add_common(sweep_cmd, false);
  sweep_cmd->add_option("--loads", loads_csv, "comma-separated URLLC loads (Mbps)");
  sweep_cmd->add_option("--algorithms", algos_csv, "comma-separated algorithm list");

  CLI11_PARSE(app, argc, argv);

  try {
    const ranslice::SimConfig config = resolve_config(flags);
    ranslice::SweepOptions options;
    options.trace_logs = flags.packet_trace;

    std::vector<double> loads;
    std::vector<ranslice::Algorithm> algorithms;
    if (run_cmd->parsed()) {
      loads = {config.urllc_load_mbps};
      algorithms = {config.algorithm};
    } else {
      std::istringstream ls(loads_csv);
      std::string item;
      while (std::getline(ls, item, ',')) loads.push_back(std::stod(item));
      std::istringstream as(algos_csv);
      while (std::getline(as, item, ',')) {
        const auto algo = ranslice::algorithm_from_string(item);
        if (!algo)
          throw ranslice::ConfigError(ranslice::ConfigErrorKind::kOutOfRange,
                                      "--algorithms \xE2\x88\x88 {coqra, nql, lrtq, ppf}");
        algorithms.push_back(*algo);
      }
    }

    const ranslice::SweepOutcome outcome =
        ranslice::sweep(config, loads, algorithms, flags.out_dir, options);
    for (const auto& report : outcome.reports) print_report(report);
    for (const auto& err : outcome.manifest.errors) std::cerr << err << "\n";
    const bool failures = !outcome.manifest.errors.empty() &&
                          outcome.reports.size() < loads.size() * algorithms.size();
    std::printf("wrote %zu files to %s in %.1f s\n", outcome.manifest.files.size(),
                flags.out_dir.c_str(), outcome.manifest.duration_s);
    return failures ? kExitRuntime : 0;
  } catch (const ranslice::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ranslice::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
