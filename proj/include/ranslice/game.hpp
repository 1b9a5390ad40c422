#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/lp.hpp"
#include "ranslice/rng.hpp"

namespace ranslice {

// A finite n-agent game over a joint action space with a feasibility mask.
// Joint actions are indexed row-major with agent 0 outermost.
struct JointGame {
  std::vector<int> actions_per_agent;
  std::vector<std::vector<double>> payoff;  // [agent][joint_index]
  std::vector<std::uint8_t> feasible;       // [joint_index]

  int num_agents() const { return static_cast<int>(actions_per_agent.size()); }

  int joint_count() const {
    int n = 1;
    for (int a : actions_per_agent) n *= a;
    return n;
  }

  int joint_index(const std::vector<int>& actions) const {
    int idx = 0;
    for (int i = 0; i < num_agents(); ++i) idx = idx * actions_per_agent[i] + actions[i];
    return idx;
  }

  std::vector<int> decode(int joint) const {
    std::vector<int> actions(num_agents());
    for (int i = num_agents() - 1; i >= 0; --i) {
      actions[i] = joint % actions_per_agent[i];
      joint /= actions_per_agent[i];
    }
    return actions;
  }

  // index of the joint action with agent i's component replaced by b
  int replace(int joint, int agent, int b) const {
    int stride = 1;
    for (int k = num_agents() - 1; k > agent; --k) stride *= actions_per_agent[k];
    const int cur = (joint / stride) % actions_per_agent[agent];
    return joint + (b - cur) * stride;
  }
};

struct JointDistribution {
  std::vector<double> probabilities;  // over joint indices, zero on infeasible
};

inline void validate_game(const JointGame& game) {
  if (game.num_agents() < 1) throw std::invalid_argument("game: no agents");
  for (int a : game.actions_per_agent)
    if (a < 1) throw std::invalid_argument("game: agent with no actions");
  const int n = game.joint_count();
  if (static_cast<int>(game.feasible.size()) != n)
    throw std::invalid_argument("game: feasibility mask size mismatch");
  if (static_cast<int>(game.payoff.size()) != game.num_agents())
    throw std::invalid_argument("game: payoff table count mismatch");
  bool any_feasible = false;
  for (int j = 0; j < n; ++j) any_feasible |= (game.feasible[j] != 0);
  if (!any_feasible) throw std::invalid_argument("game: no feasible joint action");
  for (const auto& table : game.payoff) {
    if (static_cast<int>(table.size()) != n)
      throw std::invalid_argument("game: payoff table size mismatch");
    for (double v : table)
      if (!std::isfinite(v)) throw std::invalid_argument("game: non-finite payoff");
  }
}

struct CeSolveError : std::runtime_error {
  explicit CeSolveError(LpStatus status)
      : std::runtime_error(std::string("correlated equilibrium LP failed: ") + to_string(status)),
        status(status) {}
  LpStatus status;
};

// Utilitarian correlated equilibrium:
//   max sum_a Pr(a) * sum_i Q_i(a)
//   s.t. for every agent i and own-action pair (a_i, b):
//          sum_{a_-i} Pr(a_-i, a_i) * (Q_i(a_-i, a_i) - Q_i(a_-i, b)) >= 0,
//        sum Pr = 1, Pr >= 0, Pr = 0 off the feasibility mask.
// A deviation term participates only where both the recommended and the
// deviated joint action are feasible. Deterministic given identical input:
// pivoting uses fixed lowest-index rules, and among tied optima the simplex
// settles on the earliest variable, so tie_preference (a permutation of the
// joint indices, most preferred first) chooses between equally good optima.
// Default preference is descending joint index; with zero-initialized
// Q-tables an ascending order would park agents on empty allocations that
// positive-only rewards can never unlearn.
inline JointDistribution solve_correlated_equilibrium(
    const JointGame& game, const std::vector<int>* tie_preference = nullptr) {
  validate_game(game);
  const int joint_n = game.joint_count();
  const int agents = game.num_agents();

  std::vector<int> joint_of_var;
  joint_of_var.reserve(joint_n);
  if (tie_preference) {
    std::vector<char> seen(joint_n, 0);
    for (int j : *tie_preference) {
      if (j < 0 || j >= joint_n || seen[j])
        throw std::invalid_argument("tie_preference must be a permutation of joint indices");
      seen[j] = 1;
      if (game.feasible[j]) joint_of_var.push_back(j);
    }
    for (int j = 0; j < joint_n; ++j)
      if (!seen[j] && game.feasible[j]) joint_of_var.push_back(j);
  } else {
    for (int j = joint_n - 1; j >= 0; --j)
      if (game.feasible[j]) joint_of_var.push_back(j);
  }
  const int nv = static_cast<int>(joint_of_var.size());

  std::vector<int> stride(agents, 1);
  for (int i = agents - 2; i >= 0; --i) stride[i] = stride[i + 1] * game.actions_per_agent[i + 1];

  // variable blocks per (agent, own action)
  std::vector<std::vector<std::vector<int>>> block(agents);
  for (int i = 0; i < agents; ++i) block[i].resize(game.actions_per_agent[i]);
  for (int v = 0; v < nv; ++v) {
    const int j = joint_of_var[v];
    for (int i = 0; i < agents; ++i)
      block[i][(j / stride[i]) % game.actions_per_agent[i]].push_back(v);
  }

  // Deviation rows are sparse (one block each). The sign-based presolve rules
  // from the LP layer are applied here during construction: an all-nonnegative
  // row is redundant, an all-nonpositive row forces its negative-coefficient
  // variables to zero. Iterated to a fixed point; only mixed rows reach the
  // simplex. Exact sign tests only, so the feasible set is untouched.
  struct DevRow {
    int agent, a, b;
    bool alive = true;
  };
  std::vector<DevRow> rows;
  for (int i = 0; i < agents; ++i)
    for (int a = 0; a < game.actions_per_agent[i]; ++a)
      for (int b = 0; b < game.actions_per_agent[i]; ++b)
        if (a != b) rows.push_back({i, a, b, true});

  std::vector<char> fixed(nv, 0);
  std::vector<int> term_vars;
  std::vector<double> term_coeffs;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& row : rows) {
      if (!row.alive) continue;
      term_vars.clear();
      term_coeffs.clear();
      bool any_pos = false, any_neg = false;
      const int delta = (row.b - row.a) * stride[row.agent];
      for (int v : block[row.agent][row.a]) {
        if (fixed[v]) continue;
        const int j = joint_of_var[v];
        const int jb = j + delta;
        if (!game.feasible[jb]) continue;  // deviation infeasible from this profile
        const double c = game.payoff[row.agent][j] - game.payoff[row.agent][jb];
        term_vars.push_back(v);
        term_coeffs.push_back(c);
        any_pos |= (c > 0.0);
        any_neg |= (c < 0.0);
      }
      if (term_vars.empty() || !any_neg) {
        row.alive = false;  // vacuous or satisfied by any distribution
      } else if (!any_pos) {
        for (std::size_t k = 0; k < term_vars.size(); ++k)
          if (term_coeffs[k] < 0.0) fixed[term_vars[k]] = 1;
        row.alive = false;
        changed = true;
      }
    }
  }

  // assemble the reduced LP over the surviving variables
  std::vector<int> live_index(nv, -1);
  std::vector<int> live_vars;
  for (int v = 0; v < nv; ++v) {
    if (!fixed[v]) {
      live_index[v] = static_cast<int>(live_vars.size());
      live_vars.push_back(v);
    }
  }
  LinearProgram lp;
  lp.num_vars = static_cast<int>(live_vars.size());
  lp.objective.assign(lp.num_vars, 0.0);
  for (int k = 0; k < lp.num_vars; ++k) {
    const int j = joint_of_var[live_vars[k]];
    double total = 0.0;
    for (int i = 0; i < agents; ++i) total += game.payoff[i][j];
    lp.objective[k] = total;
  }
  {
    LpRow sum_row;
    sum_row.coeffs.assign(lp.num_vars, 1.0);
    sum_row.relation = '=';
    sum_row.rhs = 1.0;
    lp.rows.push_back(std::move(sum_row));
  }
  for (const auto& row : rows) {
    if (!row.alive) continue;
    LpRow lrow;
    lrow.coeffs.assign(lp.num_vars, 0.0);
    lrow.relation = '>';
    lrow.rhs = 0.0;
    const int delta = (row.b - row.a) * stride[row.agent];
    for (int v : block[row.agent][row.a]) {
      if (fixed[v]) continue;
      const int j = joint_of_var[v];
      const int jb = j + delta;
      if (!game.feasible[jb]) continue;
      lrow.coeffs[live_index[v]] = game.payoff[row.agent][j] - game.payoff[row.agent][jb];
    }
    lp.rows.push_back(std::move(lrow));
  }

  LpSolution sol = solve_lp_no_presolve(lp);
  if (sol.status != LpStatus::kOptimal) throw CeSolveError(sol.status);

  JointDistribution dist;
  dist.probabilities.assign(joint_n, 0.0);
  double total = 0.0;
  for (int k = 0; k < lp.num_vars; ++k) {
    const double p = std::max(0.0, sol.x[k]);
    dist.probabilities[joint_of_var[live_vars[k]]] = p;
    total += p;
  }
  // clean round-off so the distribution invariants hold exactly downstream
  if (total > 0.0)
    for (double& p : dist.probabilities) p /= total;
  return dist;
}

// All feasible joint actions from which no agent has a feasible, strictly
// improving unilateral deviation. May be empty.
inline std::vector<int> find_pure_nash(const JointGame& game) {
  validate_game(game);
  std::vector<int> result;
  const int joint_n = game.joint_count();
  for (int j = 0; j < joint_n; ++j) {
    if (!game.feasible[j]) continue;
    const auto acts = game.decode(j);
    bool is_nash = true;
    for (int agent = 0; agent < game.num_agents() && is_nash; ++agent) {
      for (int b = 0; b < game.actions_per_agent[agent]; ++b) {
        if (b == acts[agent]) continue;
        const int jb = game.replace(j, agent, b);
        if (!game.feasible[jb]) continue;
        if (game.payoff[agent][jb] > game.payoff[agent][j]) {
          is_nash = false;
          break;
        }
      }
    }
    if (is_nash) result.push_back(j);
  }
  return result;
}

// Inverse-CDF draw; consumes exactly one uniform variate.
inline int sample_joint(const JointDistribution& dist, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t j = 0; j < dist.probabilities.size(); ++j) {
    const double p = dist.probabilities[j];
    if (p <= 0.0) continue;
    last_positive = static_cast<int>(j);
    cum += p;
    if (u < cum) return static_cast<int>(j);
  }
  if (last_positive < 0) throw std::invalid_argument("sample_joint: empty distribution");
  return last_positive;
}

// Plain-text debug format: one payoff table per agent, row-major.
inline std::string game_to_text(const JointGame& game) {
  std::ostringstream os;
  os << "agents " << game.num_agents() << "\n";
  os << "actions";
  for (int a : game.actions_per_agent) os << ' ' << a;
  os << "\n";
  for (int i = 0; i < game.num_agents(); ++i) {
    os << "payoff " << i << "\n";
    for (int j = 0; j < game.joint_count(); ++j)
      os << game.payoff[i][j] << ((j + 1) % game.actions_per_agent.back() == 0 ? '\n' : ' ');
  }
  os << "feasible\n";
  for (int j = 0; j < game.joint_count(); ++j)
    os << int(game.feasible[j]) << ((j + 1) % game.actions_per_agent.back() == 0 ? '\n' : ' ');
  return os.str();
}

inline JointGame game_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  JointGame game;
  int agents = 0;
  is >> tok >> agents;
  if (tok != "agents" || agents < 1) throw std::invalid_argument("game text: bad header");
  is >> tok;
  if (tok != "actions") throw std::invalid_argument("game text: missing actions");
  game.actions_per_agent.resize(agents);
  for (int& a : game.actions_per_agent) is >> a;
  const int joint_n = game.joint_count();
  game.payoff.assign(agents, std::vector<double>(joint_n, 0.0));
  for (int i = 0; i < agents; ++i) {
    int idx = 0;
    is >> tok >> idx;
    if (tok != "payoff" || idx != i) throw std::invalid_argument("game text: bad payoff block");
    for (int j = 0; j < joint_n; ++j) is >> game.payoff[i][j];
  }
  is >> tok;
  if (tok != "feasible") throw std::invalid_argument("game text: missing feasible block");
  game.feasible.resize(joint_n);
  for (int j = 0; j < joint_n; ++j) {
    int f = 0;
    is >> f;
    game.feasible[j] = static_cast<std::uint8_t>(f != 0);
  }
  if (!is) throw std::invalid_argument("game text: truncated");
  return game;
}

}  // namespace ranslice
