#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "ranslice/qlearn.hpp"
#include "ranslice/radio.hpp"

namespace ranslice {

// Exponentially averaged served throughput per UE, floored to avoid division
// by zero in the PF metric.
class PfState {
 public:
  explicit PfState(double beta = 0.01) : beta_(beta) {}

  double average(int ue) const {
    auto it = avg_.find(ue);
    return it == avg_.end() ? kFloor : it->second;
  }

  void update(int ue, double served_rate_bps) {
    const double prev = average(ue);
    avg_[ue] = std::max(kFloor, (1.0 - beta_) * prev + beta_ * served_rate_bps);
  }

  double beta() const { return beta_; }
  long& tie_rotor() { return tie_rotor_; }

  static constexpr double kFloor = 1.0;  // bits/s

 private:
  double beta_;
  std::map<int, double> avg_;
  long tie_rotor_ = 0;
};

// Award each RB group to the backlogged UE maximizing achievable rate / T̄.
// Rate already awarded within the current TTI counts against a UE's metric,
// so simultaneous backlogs share the groups instead of piling onto one UE;
// a lone backlogged UE still receives every group. Exact metric ties go to
// the lowest UE id, rotated so repeated ties alternate. Candidates must
// already be filtered to UEs with queued data.
inline void pf_intra_slice(const std::vector<int>& group_indices,
                           const std::vector<int>& candidates, const RbGrid& grid,
                           const std::vector<double>& rb_rate_bps, PfState& pf,
                           RbAllocation* alloc, int cell) {
  if (candidates.empty()) return;
  std::map<int, double> tti_rate;  // provisionally awarded rate this TTI
  for (int g : group_indices) {
    const double group_rbs = grid.group_size(g);
    double best_metric = -1.0;
    std::vector<int> tied;
    for (int ue : candidates) {
      const double metric = group_rbs * rb_rate_bps[ue] / (pf.average(ue) + tti_rate[ue]);
      if (metric > best_metric) {
        best_metric = metric;
        tied.clear();
        tied.push_back(ue);
      } else if (metric == best_metric) {
        tied.push_back(ue);
      }
    }
    int winner = tied.front();
    if (tied.size() > 1) {
      winner = tied[static_cast<std::size_t>(pf.tie_rotor() % static_cast<long>(tied.size()))];
      ++pf.tie_rotor();
    }
    tti_rate[winner] += group_rbs * rb_rate_bps[winner];
    for (int rb = grid.group_begin[g]; rb < grid.group_begin[g + 1]; ++rb)
      alloc->assign(cell, rb, winner);
  }
}

struct PpfSplit {
  int urllc_groups = 0;
  int embb_groups = 0;
};

// Priority proportional fairness: the minimum number of groups whose mean
// estimated deliverable covers the whole URLLC backlog goes to URLLC, the
// remainder to eMBB. group_order lists the cell's groups in award order.
inline PpfSplit ppf_allocate(const RbGrid& grid, const std::vector<int>& group_order,
                             const std::vector<int>& urllc_candidates, double urllc_backlog_bits,
                             const std::vector<int>& embb_candidates,
                             const std::vector<double>& rb_rate_bps, double tti_s,
                             PfState& urllc_pf, PfState& embb_pf, RbAllocation* alloc, int cell) {
  PpfSplit split;
  const int num_groups = static_cast<int>(group_order.size());
  if (urllc_backlog_bits > 0.0 && !urllc_candidates.empty()) {
    double rate_sum = 0.0;
    for (int ue : urllc_candidates) rate_sum += rb_rate_bps[ue];
    const double mean_rb_rate = rate_sum / urllc_candidates.size();
    const double mean_group_bits =
        mean_rb_rate * tti_s * (static_cast<double>(grid.num_rbs) / grid.num_groups);
    const double demand = urllc_backlog_bits / std::max(mean_group_bits, 1e-9);
    // serving the entire backlog this TTI needs a group per backlogged UE
    const long ue_floor = static_cast<long>(urllc_candidates.size());
    split.urllc_groups = static_cast<int>(
        std::min<long>(num_groups, std::max(static_cast<long>(std::ceil(demand)), ue_floor)));
  }
  split.embb_groups = num_groups - split.urllc_groups;
  std::vector<int> urllc_groups(group_order.begin(), group_order.begin() + split.urllc_groups);
  std::vector<int> embb_groups(group_order.begin() + split.urllc_groups, group_order.end());
  pf_intra_slice(urllc_groups, urllc_candidates, grid, rb_rate_bps, urllc_pf, alloc, cell);
  pf_intra_slice(embb_groups, embb_candidates, grid, rb_rate_bps, embb_pf, alloc, cell);
  return split;
}

// LRTQ actions are the full-budget splits: action k = (a_e = k, a_u = B - k).
inline std::pair<int, int> lrtq_split(int action, int budget) {
  if (action < 0 || action > budget) throw std::out_of_range("lrtq_split: action out of range");
  return {action, budget - action};
}

// Single-table epsilon-greedy step over the full-budget split set.
inline std::pair<int, int> lrtq_step(QTable& table, int state, const ExplorationPolicy& policy,
                                     long tti, Rng& rng, int budget, int* action_out) {
  const int action = epsilon_greedy(table, state, policy, tti, rng);
  if (action_out) *action_out = action;
  return lrtq_split(action, budget);
}

}  // namespace ranslice
