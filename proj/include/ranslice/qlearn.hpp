#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/rng.hpp"

namespace ranslice {

// Tabular state-action values with fixed learning parameters.
class QTable {
 public:
  QTable(int num_states, int num_actions, double alpha, double gamma)
      : num_states_(num_states),
        num_actions_(num_actions),
        alpha_(alpha),
        gamma_(gamma),
        values_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {
    if (num_states < 1 || num_actions < 1)
      throw std::invalid_argument("QTable: dimensions must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("QTable: alpha in (0,1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("QTable: gamma in [0,1)");
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  double value(int s, int a) const { return values_[index(s, a)]; }
  void set_value(int s, int a, double v) { values_[index(s, a)] = v; }

  // Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))
  void update(int s, int a, double reward, int s_next) {
    if (!std::isfinite(reward)) throw std::invalid_argument("q_update: non-finite reward");
    const std::size_t cell = index(s, a);
    const double target = reward + gamma_ * greedy_value(s_next);
    values_[cell] = (1.0 - alpha_) * values_[cell] + alpha_ * target;
  }

  // argmax over the row, lowest index wins ties
  int greedy_action(int s) const {
    check_state(s);
    int best = 0;
    for (int a = 1; a < num_actions_; ++a)
      if (values_[index(s, a)] > values_[index(s, best)]) best = a;
    return best;
  }

  double greedy_value(int s) const { return value(s, greedy_action(s)); }

  // row view used when agents exchange Q-values
  std::vector<double> row(int s) const {
    check_state(s);
    return std::vector<double>(values_.begin() + index(s, 0),
                               values_.begin() + index(s, 0) + num_actions_);
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "state,action,value\n";
    for (int s = 0; s < num_states_; ++s)
      for (int a = 0; a < num_actions_; ++a) os << s << ',' << a << ',' << value(s, a) << '\n';
    return os.str();
  }

 private:
  std::size_t index(int s, int a) const {
    check_state(s);
    if (a < 0 || a >= num_actions_) throw std::out_of_range("QTable: action out of range");
    return static_cast<std::size_t>(s) * num_actions_ + a;
  }
  void check_state(int s) const {
    if (s < 0 || s >= num_states_) throw std::out_of_range("QTable: state out of range");
  }

  int num_states_;
  int num_actions_;
  double alpha_;
  double gamma_;
  std::vector<double> values_;
};

// Fixed-epsilon exploration, disabled after the configured horizon.
struct ExplorationPolicy {
  double epsilon = 0.05;
  long exploration_horizon = 3000;  // TTIs with the epsilon coin active

  bool explores(long tti, Rng& rng) const {
    if (tti >= exploration_horizon) return false;
    return rng.uniform01() < epsilon;
  }
};

// Epsilon-greedy over a Q-row: random with probability epsilon, else greedy.
inline int epsilon_greedy(const QTable& table, int s, const ExplorationPolicy& policy, long tti,
                          Rng& rng) {
  if (policy.explores(tti, rng))
    return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(table.num_actions())));
  return table.greedy_action(s);
}

}  // namespace ranslice
