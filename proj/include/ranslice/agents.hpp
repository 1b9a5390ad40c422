#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ranslice/game.hpp"
#include "ranslice/qlearn.hpp"
#include "ranslice/radio.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

inline std::vector<long> default_bucket_edges() { return {0, 1, 2, 4, 8, 16, 32}; }

// Monotone bucketing of a queue length; the last bucket is open-ended.
inline int observe_state(long queue_length, const std::vector<long>& edges) {
  if (queue_length < 0) throw std::invalid_argument("observe_state: negative queue length");
  int state = 0;
  for (std::size_t b = 1; b < edges.size(); ++b)
    if (queue_length >= edges[b]) state = static_cast<int>(b);
  return state;
}

// Queue empty -> 0; otherwise 1 - (max queuing delay / budget)^2, clamped,
// minus the per-drop penalty. Delays and the budget are in ms.
inline double urllc_reward(bool queue_empty, double max_queue_delay_ms, double delay_budget_ms,
                           int dropped_this_tti, double drop_penalty) {
  double base = 0.0;
  if (!queue_empty) {
    const double d = std::min(std::max(max_queue_delay_ms, 0.0) / delay_budget_ms, 1.0);
    base = 1.0 - d * d;
  }
  return base - drop_penalty * dropped_this_tti;
}

// (2/pi) arctan(throughput in Mbps): strictly increasing, bounded in [0,1).
inline double embb_reward(double throughput_mbps) {
  return (2.0 / 3.14159265358979323846) * std::atan(throughput_mbps);
}

// Feasible inter-slice splits: pairs (a_e, a_u) of RB-group counts with
// a_e + a_u <= budget.
struct JointActionSpace {
  int actions_per_agent = 14;  // group counts 0..13
  int budget = 13;
  std::vector<std::pair<int, int>> feasible_pairs;  // (a_e, a_u), lexicographic

  static JointActionSpace make(int num_groups = 13) {
    JointActionSpace space;
    space.actions_per_agent = num_groups + 1;
    space.budget = num_groups;
    for (int ae = 0; ae <= num_groups; ++ae)
      for (int au = 0; au + ae <= num_groups; ++au) space.feasible_pairs.emplace_back(ae, au);
    return space;
  }

  bool feasible(int a_e, int a_u) const { return a_e + a_u <= budget; }

  std::pair<int, int> uniform_pair(Rng& rng) const {
    return feasible_pairs[rng.uniform_index(feasible_pairs.size())];
  }
};

struct SliceAgent {
  Slice kind = Slice::kUrllc;
  QTable qtable;
  int current_state = 0;
  int last_action = 0;

  SliceAgent(Slice kind, int num_states, int num_actions, double alpha, double gamma)
      : kind(kind), qtable(num_states, num_actions, alpha, gamma) {}
};

// The per-TTI game the agents exchange: each agent's payoff at (a_e, a_u) is
// its own Q(current_state, own action); pairs over the RB budget are masked.
// Agent 0 is eMBB, agent 1 is URLLC; joint index = a_e * actions + a_u.
inline JointGame build_joint_game(const SliceAgent& embb, const SliceAgent& urllc,
                                  const JointActionSpace& space) {
  const int n = space.actions_per_agent;
  JointGame game;
  game.actions_per_agent = {n, n};
  game.payoff.assign(2, std::vector<double>(n * n, 0.0));
  game.feasible.assign(n * n, 0);
  const auto embb_row = embb.qtable.row(embb.current_state);
  const auto urllc_row = urllc.qtable.row(urllc.current_state);
  for (int ae = 0; ae < n; ++ae) {
    for (int au = 0; au < n; ++au) {
      const int j = ae * n + au;
      game.payoff[0][j] = embb_row[ae];
      game.payoff[1][j] = urllc_row[au];
      game.feasible[j] = space.feasible(ae, au) ? 1 : 0;
    }
  }
  return game;
}

}  // namespace ranslice
