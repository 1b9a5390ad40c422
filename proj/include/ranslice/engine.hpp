#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/agents.hpp"
#include "ranslice/game.hpp"
#include "ranslice/qlearn.hpp"
#include "ranslice/radio.hpp"
#include "ranslice/rng.hpp"
#include "ranslice/sched.hpp"
#include "ranslice/stats.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

enum class Algorithm { kCoqra, kNql, kLrtq, kPpf };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kCoqra: return "coqra";
    case Algorithm::kNql: return "nql";
    case Algorithm::kLrtq: return "lrtq";
    case Algorithm::kPpf: return "ppf";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "coqra") return Algorithm::kCoqra;
  if (s == "nql") return Algorithm::kNql;
  if (s == "lrtq") return Algorithm::kLrtq;
  if (s == "ppf") return Algorithm::kPpf;
  return std::nullopt;
}

struct SimConfig {
  RadioParams radio;
  double tti_ms = 0.143;
  long horizon_ttis = 5000;
  long exploration_ttis = 3000;
  double alpha = 0.9;
  double gamma = 0.5;
  double epsilon = 0.05;
  double urllc_load_mbps = 2.0;
  double embb_load_mbps = 0.5;
  double urllc_cbr_fraction = 0.2;
  int packet_bits = 256;
  double urllc_deadline_ms = 1.0;
  double embb_deadline_ms = 10.0;
  double drop_penalty = 1.0;
  HarqParams harq;
  double pf_beta = 0.01;
  double lrtq_urllc_weight = 0.5;
  std::vector<long> bucket_edges = default_bucket_edges();
  Algorithm algorithm = Algorithm::kCoqra;
  std::uint64_t seed = 1;
  int runs = 10;

  double tti_s() const { return tti_ms * 1e-3; }
  long kpi_window_ttis() const { return horizon_ttis - exploration_ttis; }
  long deadline_ttis(Slice s) const {
    const double ms = (s == Slice::kUrllc) ? urllc_deadline_ms : embb_deadline_ms;
    return static_cast<long>(std::floor(ms / tti_ms + 1e-9));
  }
};

inline void validate_config(const SimConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (c.radio.num_cells < 1) fail("num_cells must be positive");
  if (c.radio.num_rbs < c.radio.num_groups || c.radio.num_groups < 1)
    fail("rb grid must have at least one RB per group");
  if (c.tti_ms <= 0.0) fail("tti_ms must be positive");
  if (c.horizon_ttis < 1) fail("horizon_ttis must be positive");
  if (c.exploration_ttis < 0 || c.exploration_ttis > c.horizon_ttis)
    fail("exploration_ttis must lie within the horizon");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) fail("alpha must be in (0,1]");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) fail("gamma must be in [0,1)");
  if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) fail("epsilon must be in [0,1]");
  if (c.urllc_load_mbps < 0.0 || c.embb_load_mbps < 0.0) fail("loads must be non-negative");
  if (c.urllc_cbr_fraction < 0.0 || c.urllc_cbr_fraction > 1.0) fail("cbr fraction in [0,1]");
  if (c.packet_bits < 1) fail("packet_bits must be positive");
  if (c.urllc_deadline_ms <= 0.0 || c.embb_deadline_ms <= 0.0) fail("deadlines must be positive");
  if (c.drop_penalty < 0.0) fail("drop_penalty must be non-negative");
  if (c.harq.rtt_ttis < 0 || c.harq.max_retx < 0) fail("harq parameters must be non-negative");
  if (!(c.pf_beta > 0.0 && c.pf_beta <= 1.0)) fail("pf_beta must be in (0,1]");
  if (c.lrtq_urllc_weight < 0.0 || c.lrtq_urllc_weight > 1.0) fail("lrtq weight in [0,1]");
  if (c.runs < 1) fail("runs must be positive");
  if (c.bucket_edges.empty() || c.bucket_edges.front() != 0) fail("bucket_edges must start at 0");
  for (std::size_t i = 1; i < c.bucket_edges.size(); ++i)
    if (c.bucket_edges[i] <= c.bucket_edges[i - 1]) fail("bucket_edges must increase");
}

struct RunKpis {
  std::uint64_t seed = 0;
  double urllc_latency_ms_mean = 0.0;
  long urllc_latency_count = 0;
  double embb_throughput_mbps = 0.0;  // delivered per cell over the KPI window
  double urllc_pdr = 0.0;
  double embb_pdr = 0.0;
  double combined_pdr = 0.0;
  bool urllc_pdr_defined = false;
  bool embb_pdr_defined = false;
  bool combined_pdr_defined = false;
  long convergence_tti = 0;
  double urllc_reward_mean = 0.0;
  double embb_reward_mean = 0.0;
  long window_urllc_arrivals = 0;
  long window_urllc_drops = 0;
  long window_embb_arrivals = 0;
  long window_embb_drops = 0;

  bool operator==(const RunKpis&) const = default;
};

// Latency histogram: kHistBins equal bins over [0, kHistMaxMs) + overflow.
constexpr int kHistBins = 60;
constexpr double kHistMaxMs = 3.0;

struct AgentTraceRow {
  long tti = 0;
  int cell = 0;
  int state_urllc = 0;
  int action_urllc = 0;
  double reward_urllc = 0.0;
  int state_embb = 0;
  int action_embb = 0;
  double reward_embb = 0.0;
};

// Window-scoped internals for debugging and engine-level tests; not exported.
struct DebugCounters {
  long urllc_deadline_drops = 0;
  long urllc_harq_drops = 0;
  long embb_deadline_drops = 0;
  long embb_harq_drops = 0;
  double mean_urllc_groups = 0.0;  // over window TTIs and cells
  double mean_embb_groups = 0.0;
  double mean_service_sinr_db = 0.0;  // over per-UE service instants
  long service_instants = 0;
  long explore_draws_in_exploitation = 0;
};

struct QTableDump {
  std::string label;  // e.g. "cell0_urllc"
  std::string csv;
};

struct EpisodeResult {
  RunKpis kpis;
  std::vector<double> urllc_reward_trace;  // per TTI, averaged over cells
  std::vector<double> embb_reward_trace;
  std::vector<long> latency_hist = std::vector<long>(kHistBins + 1, 0);
  std::vector<Packet> packet_log;         // only when tracing is requested
  std::vector<AgentTraceRow> agent_log;   // only when tracing is requested
  std::vector<QTableDump> qtable_dumps;   // final tables, learning schemes only
  std::string topology_text;
  DebugCounters debug;
};

struct RunFailure : std::runtime_error {
  RunFailure(std::uint64_t seed, const std::string& what)
      : std::runtime_error("run with seed " + std::to_string(seed) + " failed: " + what),
        seed(seed) {}
  std::uint64_t seed;
};

namespace detail {

struct CellState {
  std::unique_ptr<SliceQueue> urllc_queue;
  std::unique_ptr<SliceQueue> embb_queue;
  TrafficSource urllc_src;
  TrafficSource embb_src;
  PfState urllc_pf{0.01};
  PfState embb_pf{0.01};
  std::unique_ptr<SliceAgent> embb_agent;   // COQRA / NQL
  std::unique_ptr<SliceAgent> urllc_agent;  // COQRA / NQL
  std::unique_ptr<QTable> lrtq_table;
  Rng traffic_rng{0};
  Rng explore_rng{0};
  Rng harq_rng{0};
  Rng eq_rng{0};
  std::vector<int> urllc_ues;
  std::vector<int> embb_ues;
  // transition pending its delayed Q update at the next observation
  bool has_pending = false;
  int prev_state_u = 0, prev_state_e = 0, prev_lrtq_state = 0;
  int prev_action_u = 0, prev_action_e = 0, prev_lrtq_action = 0;
  double pending_reward_u = 0.0, pending_reward_e = 0.0, pending_reward_lrtq = 0.0;
  int tti_deadline_drops_u = 0, tti_deadline_drops_e = 0;
};

// NQL fallback when the masked game has no pure equilibrium: one greedy
// sweep seeded with a_e = 0, URLLC first, ties to the lowest index.
inline std::pair<int, int> nql_greedy_fallback(const SliceAgent& embb, const SliceAgent& urllc,
                                               const JointActionSpace& space) {
  const auto urllc_row = urllc.qtable.row(urllc.current_state);
  const auto embb_row = embb.qtable.row(embb.current_state);
  int a_u = 0;
  for (int a = 1; a <= space.budget; ++a)
    if (urllc_row[a] > urllc_row[a_u]) a_u = a;
  int a_e = 0;
  for (int a = 1; a + a_u <= space.budget; ++a)
    if (embb_row[a] > embb_row[a_e]) a_e = a;
  return {a_e, a_u};
}

}  // namespace detail

// One episode: the per-TTI loop (decide split -> PF intra-slice -> serve at
// realized SINR -> rewards -> Q updates) for every cell, KPIs over the final
// exploitation window.
inline EpisodeResult run_episode(const SimConfig& config, std::uint64_t run_seed,
                                 bool keep_trace_logs = false) {
  validate_config(config);
  const int cells = config.radio.num_cells;
  const double tti_s = config.tti_s();
  const long window_start = config.exploration_ttis;
  const RbGrid grid = RbGrid::make(config.radio.num_rbs, config.radio.num_groups);
  const JointActionSpace space = JointActionSpace::make(config.radio.num_groups);
  // CE tie preference: smallest URLLC width first (under-allocation is healed
  // by the drop penalty), then the smallest positive eMBB share with zero
  // last. eMBB rewards are positive only, so a zero-allocation tie would
  // never be unlearned; anything above zero keeps it learning while narrow
  // windows keep inter-cell collisions down.
  std::vector<int> ce_tie_preference;
  {
    const int n = space.actions_per_agent;
    for (int au = 0; au < n; ++au) {
      for (int ae = 1; ae < n; ++ae) ce_tie_preference.push_back(ae * n + au);
      ce_tie_preference.push_back(0 * n + au);
    }
  }
  const int num_buckets = static_cast<int>(config.bucket_edges.size());
  const ExplorationPolicy policy{config.epsilon, config.exploration_ttis};
  const bool learning = config.algorithm != Algorithm::kPpf;

  Rng topo_rng(derive_seed(run_seed, stream::kTopology));
  Rng shadow_rng(derive_seed(run_seed, stream::kShadowing));
  const NetworkTopology topo = make_topology(config.radio, topo_rng);
  const ChannelState channels = make_channels(topo, config.radio, shadow_rng);
  const std::vector<double> wc_rb_rate = worst_case_rb_rate_bps(topo, channels);

  EpisodeResult result;
  result.kpis.seed = run_seed;
  result.topology_text = topology_to_text(topo, channels);
  result.urllc_reward_trace.assign(config.horizon_ttis, 0.0);
  result.embb_reward_trace.assign(config.horizon_ttis, 0.0);

  std::vector<detail::CellState> cell_states(cells);
  for (int c = 0; c < cells; ++c) {
    auto& cs = cell_states[c];
    for (const auto& ue : topo.ues) {
      if (ue.cell != c) continue;
      (ue.slice == Slice::kUrllc ? cs.urllc_ues : cs.embb_ues).push_back(ue.id);
    }
    if (cs.urllc_ues.empty() || cs.embb_ues.empty())
      throw RunFailure(run_seed, "cell without UEs in a slice");
    cs.urllc_queue = std::make_unique<SliceQueue>(cs.urllc_ues);
    cs.embb_queue = std::make_unique<SliceQueue>(cs.embb_ues);
    cs.urllc_src = TrafficSource::make(config.urllc_load_mbps * 1e6, config.urllc_cbr_fraction,
                                       tti_s, config.packet_bits);
    cs.embb_src = TrafficSource::make(config.embb_load_mbps * 1e6, 0.0, tti_s, config.packet_bits);
    cs.urllc_pf = PfState(config.pf_beta);
    cs.embb_pf = PfState(config.pf_beta);
    cs.traffic_rng = Rng(derive_seed(run_seed, stream::kTraffic, c));
    cs.explore_rng = Rng(derive_seed(run_seed, stream::kExploration, c));
    cs.harq_rng = Rng(derive_seed(run_seed, stream::kHarq, c));
    cs.eq_rng = Rng(derive_seed(run_seed, stream::kEquilibrium, c));
    if (config.algorithm == Algorithm::kCoqra || config.algorithm == Algorithm::kNql) {
      cs.embb_agent = std::make_unique<SliceAgent>(Slice::kEmbb, num_buckets,
                                                   space.actions_per_agent, config.alpha,
                                                   config.gamma);
      cs.urllc_agent = std::make_unique<SliceAgent>(Slice::kUrllc, num_buckets,
                                                    space.actions_per_agent, config.alpha,
                                                    config.gamma);
    } else if (config.algorithm == Algorithm::kLrtq) {
      cs.lrtq_table = std::make_unique<QTable>(num_buckets * num_buckets, space.actions_per_agent,
                                               config.alpha, config.gamma);
    }
  }

  const long urllc_deadline = config.deadline_ttis(Slice::kUrllc);
  const long embb_deadline = config.deadline_ttis(Slice::kEmbb);

  RbAllocation alloc(cells, config.radio.num_rbs);
  double window_urllc_latency_sum = 0.0;
  long window_urllc_latency_count = 0;
  double window_embb_delivered_bits = 0.0;
  double window_reward_u_sum = 0.0, window_reward_e_sum = 0.0;
  double window_allocated_capacity_bits = 0.0;
  double window_delivered_bits_total = 0.0;

  for (long tti = 0; tti < config.horizon_ttis; ++tti) {
    const bool in_window = tti >= window_start;
    alloc.clear();

    // phase 1: queue upkeep, observation, pending Q updates, split decisions
    for (int c = 0; c < cells; ++c) {
      auto& cs = cell_states[c];
      cs.urllc_queue->step_reentries(tti);
      cs.embb_queue->step_reentries(tti);

      const int urllc_arrivals = cs.urllc_src.draw_arrivals(cs.traffic_rng);
      long packet_seq = (tti * static_cast<long>(cells) + c) * 4096;
      for (int i = 0; i < urllc_arrivals; ++i) {
        Packet p;
        p.id = packet_seq++;
        p.ue = cs.urllc_ues[cs.traffic_rng.uniform_index(cs.urllc_ues.size())];
        p.size_bits = config.packet_bits;
        p.residual_bits = config.packet_bits;
        p.arrival_tti = tti;
        cs.urllc_queue->add_arrival(p);
      }
      const int embb_arrivals = cs.embb_src.draw_arrivals(cs.traffic_rng);
      for (int i = 0; i < embb_arrivals; ++i) {
        Packet p;
        p.id = packet_seq++;
        p.ue = cs.embb_ues[cs.traffic_rng.uniform_index(cs.embb_ues.size())];
        p.size_bits = config.packet_bits;
        p.residual_bits = config.packet_bits;
        p.arrival_tti = tti;
        cs.embb_queue->add_arrival(p);
      }
      if (in_window) {
        result.kpis.window_urllc_arrivals += urllc_arrivals;
        result.kpis.window_embb_arrivals += embb_arrivals;
      }

      std::vector<Packet> deadline_drops;
      cs.tti_deadline_drops_u = cs.urllc_queue->drop_expired(
          tti, urllc_deadline, keep_trace_logs ? &deadline_drops : nullptr);
      cs.tti_deadline_drops_e = cs.embb_queue->drop_expired(
          tti, embb_deadline, keep_trace_logs ? &deadline_drops : nullptr);
      if (keep_trace_logs)
        result.packet_log.insert(result.packet_log.end(), deadline_drops.begin(),
                                 deadline_drops.end());
      if (in_window) {
        result.kpis.window_urllc_drops += cs.tti_deadline_drops_u;
        result.kpis.window_embb_drops += cs.tti_deadline_drops_e;
        result.debug.urllc_deadline_drops += cs.tti_deadline_drops_u;
        result.debug.embb_deadline_drops += cs.tti_deadline_drops_e;
      }

      const int state_u = observe_state(cs.urllc_queue->queue_length(), config.bucket_edges);
      const int state_e = observe_state(cs.embb_queue->queue_length(), config.bucket_edges);

      // delayed Q update: (s_{t-1}, a_{t-1}, r_{t-1}) -> s_t
      if (cs.has_pending) {
        if (config.algorithm == Algorithm::kLrtq) {
          cs.lrtq_table->update(cs.prev_lrtq_state, cs.prev_lrtq_action, cs.pending_reward_lrtq,
                                state_u * num_buckets + state_e);
        } else if (learning) {
          cs.urllc_agent->qtable.update(cs.prev_state_u, cs.prev_action_u, cs.pending_reward_u,
                                        state_u);
          cs.embb_agent->qtable.update(cs.prev_state_e, cs.prev_action_e, cs.pending_reward_e,
                                       state_e);
        }
        cs.has_pending = false;
      }

      int a_e = 0, a_u = 0;
      switch (config.algorithm) {
        case Algorithm::kCoqra: {
          cs.urllc_agent->current_state = state_u;
          cs.embb_agent->current_state = state_e;
          if (policy.explores(tti, cs.explore_rng)) {
            const auto pair = space.uniform_pair(cs.explore_rng);
            a_e = pair.first;
            a_u = pair.second;
          } else {
            const JointGame game = build_joint_game(*cs.embb_agent, *cs.urllc_agent, space);
            JointDistribution dist;
            try {
              dist = solve_correlated_equilibrium(game, &ce_tie_preference);
            } catch (const CeSolveError& e) {
              throw RunFailure(run_seed, std::string(e.what()) + " at TTI " +
                                             std::to_string(tti) + " cell " + std::to_string(c));
            }
            const int joint = sample_joint(dist, cs.eq_rng);
            a_e = joint / space.actions_per_agent;
            a_u = joint % space.actions_per_agent;
          }
          break;
        }
        case Algorithm::kNql: {
          cs.urllc_agent->current_state = state_u;
          cs.embb_agent->current_state = state_e;
          if (policy.explores(tti, cs.explore_rng)) {
            const auto pair = space.uniform_pair(cs.explore_rng);
            a_e = pair.first;
            a_u = pair.second;
          } else {
            const JointGame game = build_joint_game(*cs.embb_agent, *cs.urllc_agent, space);
            const std::vector<int> nash = find_pure_nash(game);
            int joint = -1;
            if (nash.empty()) {
              const auto pair =
                  detail::nql_greedy_fallback(*cs.embb_agent, *cs.urllc_agent, space);
              a_e = pair.first;
              a_u = pair.second;
            } else {
              joint = nash.size() == 1 ? nash.front()
                                       : nash[cs.eq_rng.uniform_index(nash.size())];
              a_e = joint / space.actions_per_agent;
              a_u = joint % space.actions_per_agent;
            }
          }
          break;
        }
        case Algorithm::kLrtq: {
          const int state = state_u * num_buckets + state_e;
          int action = 0;
          const auto pair =
              lrtq_step(*cs.lrtq_table, state, policy, tti, cs.explore_rng, space.budget, &action);
          a_e = pair.first;
          a_u = pair.second;
          cs.prev_lrtq_state = state;
          cs.prev_lrtq_action = action;
          break;
        }
        case Algorithm::kPpf:
          break;  // split derived from queue state below
      }
      if (a_e + a_u > space.budget)
        throw RunFailure(run_seed, "RB budget violated at TTI " + std::to_string(tti));
      cs.prev_state_u = state_u;
      cs.prev_state_e = state_e;

      std::vector<int> urllc_cand, embb_cand;
      for (int ue : cs.urllc_ues)
        if (cs.urllc_queue->has_backlog(ue)) urllc_cand.push_back(ue);
      for (int ue : cs.embb_ues)
        if (cs.embb_queue->has_backlog(ue)) embb_cand.push_back(ue);

      // Static frequency plan: each cell's group indexing is rotated so that
      // lightly loaded cells land on different physical groups. Half-band
      // steps put adjacent cells (the dominant interferers) farthest apart.
      // URLLC grows up from the cell's offset, eMBB down from it.
      const int offset = (c * std::max(1, grid.num_groups / 2)) % grid.num_groups;
      auto physical = [&](int logical) { return (logical + offset) % grid.num_groups; };
      if (config.algorithm == Algorithm::kPpf) {
        std::vector<int> order(grid.num_groups);
        for (int g = 0; g < grid.num_groups; ++g) order[g] = physical(g);
        const PpfSplit split =
            ppf_allocate(grid, order, urllc_cand, cs.urllc_queue->total_backlog_bits(), embb_cand,
                         wc_rb_rate, tti_s, cs.urllc_pf, cs.embb_pf, &alloc, c);
        a_u = split.urllc_groups;
        a_e = split.embb_groups;
      } else {
        std::vector<int> urllc_groups, embb_groups;
        for (int g = 0; g < a_u; ++g) urllc_groups.push_back(physical(g));
        for (int g = grid.num_groups - a_e; g < grid.num_groups; ++g)
          embb_groups.push_back(physical(g));
        pf_intra_slice(urllc_groups, urllc_cand, grid, wc_rb_rate, cs.urllc_pf, &alloc, c);
        pf_intra_slice(embb_groups, embb_cand, grid, wc_rb_rate, cs.embb_pf, &alloc, c);
      }
      cs.prev_action_u = a_u;
      cs.prev_action_e = a_e;
      if (in_window) {
        result.debug.mean_urllc_groups += static_cast<double>(a_u) / cells;
        result.debug.mean_embb_groups += static_cast<double>(a_e) / cells;
      }
    }

    // phase 2: all allocations fixed; serve at realized SINR, then rewards
    for (int c = 0; c < cells; ++c) {
      auto& cs = cell_states[c];
      ServeStats urllc_stats, embb_stats;
      for (Slice slice : {Slice::kUrllc, Slice::kEmbb}) {
        SliceQueue& queue = (slice == Slice::kUrllc) ? *cs.urllc_queue : *cs.embb_queue;
        ServeStats& stats = (slice == Slice::kUrllc) ? urllc_stats : embb_stats;
        PfState& pf = (slice == Slice::kUrllc) ? cs.urllc_pf : cs.embb_pf;
        for (int ue : queue.ue_ids()) {
          std::vector<int> owned;
          for (int rb = 0; rb < config.radio.num_rbs; ++rb)
            if (alloc.owner_at(c, rb) == ue) owned.push_back(rb);
          // T̄ is kept on the same rate model the PF metric uses (the static
          // estimates), so the metric equalizes time shares; mixing realized
          // capacity into T̄ would starve UEs whose estimates are pessimistic.
          double served_rate = 0.0;
          if (!owned.empty()) {
            const double capacity = link_capacity_bps(ue, owned, alloc, channels, topo);
            double sinr_sum = 0.0;
            for (int rb : owned) sinr_sum += sinr_linear(ue, rb, alloc, channels, topo);
            const double sinr_eff = sinr_sum / static_cast<double>(owned.size());
            queue.serve_ue(ue, capacity * tti_s, tti, sinr_eff, config.harq, cs.harq_rng, &stats);
            served_rate = wc_rb_rate[ue] * static_cast<double>(owned.size());
            if (in_window) {
              window_allocated_capacity_bits += capacity * tti_s;
              result.debug.mean_service_sinr_db += 10.0 * std::log10(sinr_eff);
              ++result.debug.service_instants;
            }
          }
          pf.update(ue, served_rate);
        }
      }
      cs.urllc_queue->finish_tti(tti);
      cs.embb_queue->finish_tti(tti);

      if (keep_trace_logs) {
        for (const auto& p : urllc_stats.finished) result.packet_log.push_back(p);
        for (const auto& p : embb_stats.finished) result.packet_log.push_back(p);
      }
      if (in_window) {
        result.kpis.window_urllc_drops += urllc_stats.harq_drops;
        result.kpis.window_embb_drops += embb_stats.harq_drops;
        result.debug.urllc_harq_drops += urllc_stats.harq_drops;
        result.debug.embb_harq_drops += embb_stats.harq_drops;
        for (const auto& p : urllc_stats.finished) {
          if (p.dropped) continue;
          const double delay = p.total_delay_ms(config.tti_ms);
          window_urllc_latency_sum += delay;
          ++window_urllc_latency_count;
          int bin = static_cast<int>(delay / (kHistMaxMs / kHistBins));
          if (bin > kHistBins) bin = kHistBins;
          ++result.latency_hist[bin];
        }
        window_embb_delivered_bits += embb_stats.delivered_bits;
        window_delivered_bits_total += embb_stats.delivered_bits + urllc_stats.delivered_bits;
      }

      // Reward view: the queue as this TTI's action faced it. Packets served
      // this TTI contribute their final queuing delay, held packets their
      // accumulated wait, deadline expiries the full budget. Measuring only
      // the leftover queue would score prompt service and starvation alike.
      long max_wait = cs.urllc_queue->max_waited_ttis();
      bool saw_urllc_traffic = cs.urllc_queue->queue_length() > 0;
      for (const auto& p : urllc_stats.finished) {
        if (p.dropped) continue;
        max_wait = std::max(max_wait, p.waited_ttis);
        saw_urllc_traffic = true;
      }
      double max_wait_ms = max_wait < 0 ? 0.0 : max_wait * config.tti_ms;
      if (cs.tti_deadline_drops_u > 0) {
        max_wait_ms = std::max(max_wait_ms, config.urllc_deadline_ms);
        saw_urllc_traffic = true;
      }
      const int urllc_drops_tti = urllc_stats.harq_drops + cs.tti_deadline_drops_u;
      const double r_u = urllc_reward(!saw_urllc_traffic, max_wait_ms, config.urllc_deadline_ms,
                                      urllc_drops_tti, config.drop_penalty);
      const double r_e = embb_reward(embb_stats.delivered_bits / tti_s / 1e6);
      if (!(r_e >= 0.0 && r_e < 1.0) || r_u > 1.0 ||
          r_u < -config.drop_penalty * urllc_drops_tti - 1e-12)
        throw RunFailure(run_seed, "reward out of bounds at TTI " + std::to_string(tti));
      result.urllc_reward_trace[tti] += r_u / cells;
      result.embb_reward_trace[tti] += r_e / cells;
      if (in_window) {
        window_reward_u_sum += r_u / cells;
        window_reward_e_sum += r_e / cells;
      }

      if (config.algorithm == Algorithm::kLrtq) {
        cs.pending_reward_lrtq =
            config.lrtq_urllc_weight * r_u + (1.0 - config.lrtq_urllc_weight) * r_e;
        cs.has_pending = true;
      } else if (learning) {
        cs.pending_reward_u = r_u;
        cs.pending_reward_e = r_e;
        cs.has_pending = true;
      }

      if (keep_trace_logs) {
        AgentTraceRow row;
        row.tti = tti;
        row.cell = c;
        row.state_urllc = cs.prev_state_u;
        row.action_urllc = cs.prev_action_u;
        row.reward_urllc = r_u;
        row.state_embb = cs.prev_state_e;
        row.action_embb = cs.prev_action_e;
        row.reward_embb = r_e;
        result.agent_log.push_back(row);
      }

      if (!cs.urllc_queue->conserves() || !cs.embb_queue->conserves())
        throw RunFailure(run_seed, "conservation violated at TTI " + std::to_string(tti));
    }
  }

  // flush the last pending updates against the end-of-run queue state
  for (int c = 0; c < cells; ++c) {
    auto& cs = cell_states[c];
    if (!cs.has_pending) continue;
    const int state_u = observe_state(cs.urllc_queue->queue_length(), config.bucket_edges);
    const int state_e = observe_state(cs.embb_queue->queue_length(), config.bucket_edges);
    if (config.algorithm == Algorithm::kLrtq) {
      cs.lrtq_table->update(cs.prev_lrtq_state, cs.prev_lrtq_action, cs.pending_reward_lrtq,
                            state_u * num_buckets + state_e);
    } else if (learning) {
      cs.urllc_agent->qtable.update(cs.prev_state_u, cs.prev_action_u, cs.pending_reward_u,
                                    state_u);
      cs.embb_agent->qtable.update(cs.prev_state_e, cs.prev_action_e, cs.pending_reward_e,
                                   state_e);
    }
    cs.has_pending = false;
  }

  const double window_s = config.kpi_window_ttis() * tti_s;
  auto& k = result.kpis;
  k.urllc_latency_count = window_urllc_latency_count;
  k.urllc_latency_ms_mean =
      window_urllc_latency_count > 0 ? window_urllc_latency_sum / window_urllc_latency_count : 0.0;
  k.embb_throughput_mbps = window_embb_delivered_bits / window_s / 1e6 / cells;
  k.urllc_pdr_defined = k.window_urllc_arrivals > 0;
  k.embb_pdr_defined = k.window_embb_arrivals > 0;
  k.combined_pdr_defined = (k.window_urllc_arrivals + k.window_embb_arrivals) > 0;
  k.urllc_pdr = k.urllc_pdr_defined
                    ? static_cast<double>(k.window_urllc_drops) / k.window_urllc_arrivals
                    : 0.0;
  k.embb_pdr =
      k.embb_pdr_defined ? static_cast<double>(k.window_embb_drops) / k.window_embb_arrivals : 0.0;
  k.combined_pdr = k.combined_pdr_defined
                       ? static_cast<double>(k.window_urllc_drops + k.window_embb_drops) /
                             (k.window_urllc_arrivals + k.window_embb_arrivals)
                       : 0.0;
  k.urllc_reward_mean = window_reward_u_sum / config.kpi_window_ttis();
  k.embb_reward_mean = window_reward_e_sum / config.kpi_window_ttis();
  if (window_delivered_bits_total > window_allocated_capacity_bits + 1e-6)
    throw RunFailure(run_seed, "delivered bits exceed allocated capacity");

  for (int c = 0; c < cells; ++c) {
    const auto& cs = cell_states[c];
    const std::string prefix = "cell" + std::to_string(c) + "_";
    if (cs.urllc_agent)
      result.qtable_dumps.push_back({prefix + "urllc", cs.urllc_agent->qtable.to_csv()});
    if (cs.embb_agent)
      result.qtable_dumps.push_back({prefix + "embb", cs.embb_agent->qtable.to_csv()});
    if (cs.lrtq_table) result.qtable_dumps.push_back({prefix + "lrtq", cs.lrtq_table->to_csv()});
  }

  result.debug.mean_urllc_groups /= config.kpi_window_ttis();
  result.debug.mean_embb_groups /= config.kpi_window_ttis();
  if (result.debug.service_instants > 0)
    result.debug.mean_service_sinr_db /= result.debug.service_instants;

  std::vector<double> total_trace(config.horizon_ttis, 0.0);
  for (long t = 0; t < config.horizon_ttis; ++t)
    total_trace[t] = result.urllc_reward_trace[t] + result.embb_reward_trace[t];
  k.convergence_tti = convergence_tti(total_trace, 100, config.kpi_window_ttis(), 0.05);
  return result;
}

struct AggregateKpis {
  MeanCi urllc_latency_ms;
  MeanCi embb_throughput_mbps;
  MeanCi combined_pdr;
  MeanCi urllc_pdr;
  MeanCi embb_pdr;
  MeanCi convergence_tti;
};

struct ExperimentReport {
  Algorithm algorithm = Algorithm::kCoqra;
  double urllc_load_mbps = 0.0;
  double embb_load_mbps = 0.0;
  std::uint64_t base_seed = 0;
  int runs = 0;
  std::vector<RunKpis> per_run;
  AggregateKpis aggregate;
  std::vector<long> latency_hist;               // summed over runs
  std::vector<double> urllc_reward_trace_mean;  // per TTI, averaged over runs
  std::vector<double> embb_reward_trace_mean;
};

inline std::uint64_t run_seed_for(std::uint64_t base_seed, int run_index) {
  return derive_seed(base_seed, 0x52554e53ULL /* "RUNS" */, static_cast<std::uint64_t>(run_index));
}

// Multi-seed experiment; per-run seeds derive deterministically from the base
// seed unless an explicit list is given. Runs execute in parallel.
inline ExperimentReport run_experiment(
    const SimConfig& config, const std::vector<std::uint64_t>* seed_override = nullptr,
    std::vector<EpisodeResult>* episodes_out = nullptr, bool keep_trace_logs = false) {
  validate_config(config);
  std::vector<std::uint64_t> seeds;
  if (seed_override) {
    if (static_cast<int>(seed_override->size()) != config.runs)
      throw std::invalid_argument("seed override size must match runs");
    seeds = *seed_override;
  } else {
    for (int k = 0; k < config.runs; ++k) seeds.push_back(run_seed_for(config.seed, k));
  }

  std::vector<std::future<EpisodeResult>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t seed : seeds)
    futures.push_back(std::async(std::launch::async, [&config, seed, keep_trace_logs] {
      return run_episode(config, seed, keep_trace_logs);
    }));

  ExperimentReport report;
  report.algorithm = config.algorithm;
  report.urllc_load_mbps = config.urllc_load_mbps;
  report.embb_load_mbps = config.embb_load_mbps;
  report.base_seed = config.seed;
  report.runs = config.runs;
  report.latency_hist.assign(kHistBins + 1, 0);
  report.urllc_reward_trace_mean.assign(config.horizon_ttis, 0.0);
  report.embb_reward_trace_mean.assign(config.horizon_ttis, 0.0);

  for (std::size_t i = 0; i < futures.size(); ++i) {
    EpisodeResult episode;
    try {
      episode = futures[i].get();
    } catch (const RunFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw RunFailure(seeds[i], e.what());
    }
    report.per_run.push_back(episode.kpis);
    for (int b = 0; b <= kHistBins; ++b) report.latency_hist[b] += episode.latency_hist[b];
    for (long t = 0; t < config.horizon_ttis; ++t) {
      report.urllc_reward_trace_mean[t] += episode.urllc_reward_trace[t] / config.runs;
      report.embb_reward_trace_mean[t] += episode.embb_reward_trace[t] / config.runs;
    }
    if (episodes_out) episodes_out->push_back(std::move(episode));
  }

  auto collect = [&](auto getter) {
    std::vector<double> v;
    v.reserve(report.per_run.size());
    for (const auto& r : report.per_run) v.push_back(getter(r));
    return mean_ci95(v);
  };
  report.aggregate.urllc_latency_ms = collect([](const RunKpis& r) { return r.urllc_latency_ms_mean; });
  report.aggregate.embb_throughput_mbps =
      collect([](const RunKpis& r) { return r.embb_throughput_mbps; });
  report.aggregate.combined_pdr = collect([](const RunKpis& r) { return r.combined_pdr; });
  report.aggregate.urllc_pdr = collect([](const RunKpis& r) { return r.urllc_pdr; });
  report.aggregate.embb_pdr = collect([](const RunKpis& r) { return r.embb_pdr; });
  report.aggregate.convergence_tti =
      collect([](const RunKpis& r) { return static_cast<double>(r.convergence_tti); });
  return report;
}

}  // namespace ranslice
