#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ranslice {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "OPTIMAL";
    case LpStatus::kInfeasible: return "INFEASIBLE";
    case LpStatus::kUnbounded: return "UNBOUNDED";
    case LpStatus::kNumericalFailure: return "NUMERICAL_FAILURE";
  }
  return "?";
}

// One linear constraint over x >= 0. relation is '<' (<=), '=' or '>' (>=).
struct LpRow {
  std::vector<double> coeffs;
  char relation = '<';
  double rhs = 0.0;
};

// maximize objective . x  subject to rows, x >= 0
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
};

namespace detail {

// Dense two-phase tableau simplex. Dantzig pricing with a switch to Bland's
// rule after a run of degenerate pivots, which guarantees termination.
class SimplexTableau {
 public:
  explicit SimplexTableau(const LinearProgram& lp) : n_struct_(lp.num_vars) {
    const std::size_t m = lp.rows.size();
    // column layout: [structural | slack/surplus | artificial]
    n_slack_ = 0;
    for (const auto& r : lp.rows)
      if (r.relation != '=') ++n_slack_;
    n_art_ = 0;
    std::vector<int> art_of_row(m, -1);
    // rows normalized to rhs >= 0 to keep the initial basis feasible
    std::vector<double> sign(m, 1.0);
    for (std::size_t i = 0; i < m; ++i)
      if (lp.rows[i].rhs < 0.0) sign[i] = -1.0;
    int slack_cursor = 0;
    for (std::size_t i = 0; i < m; ++i) {
      char rel = lp.rows[i].relation;
      if (sign[i] < 0.0 && rel != '=') rel = (rel == '<') ? '>' : '<';
      const bool needs_art = (rel == '=' || rel == '>');
      if (needs_art) art_of_row[i] = n_art_++;
      (void)slack_cursor;
    }
    width_ = n_struct_ + n_slack_ + n_art_ + 1;  // + rhs column
    tab_.assign(m * width_, 0.0);
    basis_.assign(m, -1);

    int slack_col = n_struct_;
    int art_col = n_struct_ + n_slack_;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& r = lp.rows[i];
      char rel = r.relation;
      double s = sign[i];
      if (s < 0.0 && rel != '=') rel = (rel == '<') ? '>' : '<';
      double* row = &tab_[i * width_];
      for (int j = 0; j < n_struct_ && j < static_cast<int>(r.coeffs.size()); ++j)
        row[j] = s * r.coeffs[j];
      row[width_ - 1] = s * r.rhs;
      if (rel == '<') {
        row[slack_col] = 1.0;
        basis_[i] = slack_col;
        ++slack_col;
      } else if (rel == '>') {
        row[slack_col] = -1.0;  // surplus
        ++slack_col;
        row[art_col] = 1.0;
        basis_[i] = art_col;
        ++art_col;
      } else {
        row[art_col] = 1.0;
        basis_[i] = art_col;
        ++art_col;
      }
    }
    art_begin_ = n_struct_ + n_slack_;
  }

  LpStatus solve(const std::vector<double>& objective, std::vector<double>* x_out,
                 double* obj_out) {
    // phase 1: maximize -sum(artificials)
    if (n_art_ > 0) {
      std::vector<double> cost(num_cols(), 0.0);
      for (int j = art_begin_; j < art_begin_ + n_art_; ++j) cost[j] = -1.0;
      LpStatus st = run_phase(cost, /*allow_art=*/true);
      if (st != LpStatus::kOptimal) return st == LpStatus::kUnbounded ? LpStatus::kNumericalFailure : st;
      double art_sum = 0.0;
      for (std::size_t i = 0; i < basis_.size(); ++i)
        if (basis_[i] >= art_begin_) art_sum += rhs(i);
      if (art_sum > 1e-7) return LpStatus::kInfeasible;
      purge_artificials();
    }
    // phase 2
    std::vector<double> cost(num_cols(), 0.0);
    for (int j = 0; j < n_struct_ && j < static_cast<int>(objective.size()); ++j)
      cost[j] = objective[j];
    LpStatus st = run_phase(cost, /*allow_art=*/false);
    if (st != LpStatus::kOptimal) return st;
    x_out->assign(n_struct_, 0.0);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < n_struct_) (*x_out)[basis_[i]] = rhs(i);
    double obj = 0.0;
    for (int j = 0; j < n_struct_ && j < static_cast<int>(objective.size()); ++j)
      obj += objective[j] * (*x_out)[j];
    *obj_out = obj;
    return LpStatus::kOptimal;
  }

 private:
  int num_cols() const { return width_ - 1; }
  double rhs(std::size_t i) const { return tab_[i * width_ + width_ - 1]; }

  void pivot(std::size_t prow, int pcol) {
    double* pr = &tab_[prow * width_];
    const double pv = pr[pcol];
    for (int j = 0; j < width_; ++j) pr[j] /= pv;
    pr[pcol] = 1.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (i == prow) continue;
      double* row = &tab_[i * width_];
      const double f = row[pcol];
      if (f == 0.0) continue;
      for (int j = 0; j < width_; ++j) row[j] -= f * pr[j];
      row[pcol] = 0.0;
    }
    basis_[prow] = pcol;
  }

  // Reduced costs r = c - c_B^T (B^-1 A), computed against the current tableau.
  void reduced_costs(const std::vector<double>& cost, std::vector<double>* r) const {
    r->assign(num_cols(), 0.0);
    for (int j = 0; j < num_cols(); ++j) (*r)[j] = cost[j];
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * width_];
      for (int j = 0; j < num_cols(); ++j) (*r)[j] -= cb * row[j];
    }
  }

  LpStatus run_phase(const std::vector<double>& cost, bool allow_art) {
    std::vector<double> r;
    reduced_costs(cost, &r);
    const int col_limit = allow_art ? num_cols() : art_begin_;
    const double enter_tol = 1e-9;
    const double pivot_tol = 1e-10;
    bool bland = false;
    int degenerate_streak = 0;
    const long iter_cap = 2000 + 60L * (static_cast<long>(basis_.size()) + num_cols());
    for (long iter = 0; iter < iter_cap; ++iter) {
      // entering column
      int pcol = -1;
      if (bland) {
        for (int j = 0; j < col_limit; ++j)
          if (r[j] > enter_tol) { pcol = j; break; }
      } else {
        double best = enter_tol;
        for (int j = 0; j < col_limit; ++j)
          if (r[j] > best) { best = r[j]; pcol = j; }
      }
      if (pcol < 0) return LpStatus::kOptimal;
      // ratio test, ties by smallest basis index (Bland-compatible)
      std::size_t prow = basis_.size();
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double a = tab_[i * width_ + pcol];
        if (a <= pivot_tol) continue;
        const double ratio = rhs(i) / a;
        if (prow == basis_.size() || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[i] < basis_[prow])) {
          prow = i;
          best_ratio = ratio;
        }
      }
      if (prow == basis_.size()) return LpStatus::kUnbounded;
      if (best_ratio <= 1e-12) {
        if (++degenerate_streak > 40) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
      // pivot and update the reduced-cost row with the same elimination
      const double rf = r[pcol];
      pivot(prow, pcol);
      const double* pr = &tab_[prow * width_];
      for (int j = 0; j < num_cols(); ++j) r[j] -= rf * pr[j];
      r[pcol] = 0.0;
    }
    return LpStatus::kNumericalFailure;
  }

  // After phase 1, kick zero-valued artificials out of the basis (degenerate
  // pivots) or drop the dependent rows they certify.
  void purge_artificials() {
    for (std::size_t i = 0; i < basis_.size();) {
      if (basis_[i] < art_begin_) {
        ++i;
        continue;
      }
      int pcol = -1;
      const double* row = &tab_[i * width_];
      for (int j = 0; j < art_begin_; ++j)
        if (std::fabs(row[j]) > 1e-9) { pcol = j; break; }
      if (pcol >= 0) {
        pivot(i, pcol);
        ++i;
      } else {
        // row is zero over the real columns: dependent constraint
        const std::size_t last = basis_.size() - 1;
        if (i != last) {
          std::copy(&tab_[last * width_], &tab_[last * width_] + width_, &tab_[i * width_]);
          basis_[i] = basis_[last];
        }
        basis_.pop_back();
        tab_.resize(basis_.size() * width_);
      }
    }
  }

  int n_struct_ = 0;
  int n_slack_ = 0;
  int n_art_ = 0;
  int art_begin_ = 0;
  int width_ = 0;
  std::vector<double> tab_;
  std::vector<int> basis_;
};

// Sign-based presolve for homogeneous (rhs == 0) inequality rows:
//   ax >= 0 with a >= 0 elementwise        -> redundant
//   ax >= 0 with a <= 0, some a_j < 0      -> forces x_j = 0 wherever a_j < 0
// and the mirrored rules for <=. Exact: the rules only test signs, so the
// feasible set is preserved bit-for-bit. Iterates to a fixed point.
struct PresolveResult {
  LinearProgram reduced;
  std::vector<int> var_map;  // reduced var index -> original var index
  bool infeasible = false;
};

inline PresolveResult presolve_nonneg_rows(const LinearProgram& lp) {
  PresolveResult out;
  std::vector<char> fixed(lp.num_vars, 0);
  std::vector<char> row_dead(lp.rows.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
      if (row_dead[i]) continue;
      const auto& row = lp.rows[i];
      if (row.rhs != 0.0 || row.relation == '=') continue;
      bool any_pos = false, any_neg = false;
      for (int j = 0; j < lp.num_vars; ++j) {
        if (fixed[j] || j >= static_cast<int>(row.coeffs.size())) continue;
        if (row.coeffs[j] > 0.0) any_pos = true;
        if (row.coeffs[j] < 0.0) any_neg = true;
        if (any_pos && any_neg) break;
      }
      if (any_pos && any_neg) continue;
      const bool ge = (row.relation == '>');
      if ((ge && !any_neg) || (!ge && !any_pos)) {
        row_dead[i] = 1;  // satisfied by any x >= 0
        changed = true;
      } else {
        // single-signed the wrong way: every participating variable is forced to 0
        for (int j = 0; j < lp.num_vars && j < static_cast<int>(row.coeffs.size()); ++j) {
          if (!fixed[j] && row.coeffs[j] != 0.0) {
            fixed[j] = 1;
            changed = true;
          }
        }
        row_dead[i] = 1;
      }
    }
  }
  // rebuild over surviving variables and rows
  std::vector<int> new_index(lp.num_vars, -1);
  for (int j = 0; j < lp.num_vars; ++j) {
    if (!fixed[j]) {
      new_index[j] = static_cast<int>(out.var_map.size());
      out.var_map.push_back(j);
    }
  }
  out.reduced.num_vars = static_cast<int>(out.var_map.size());
  out.reduced.objective.assign(out.reduced.num_vars, 0.0);
  for (int j = 0; j < lp.num_vars && j < static_cast<int>(lp.objective.size()); ++j)
    if (new_index[j] >= 0) out.reduced.objective[new_index[j]] = lp.objective[j];
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    if (row_dead[i]) continue;
    const auto& row = lp.rows[i];
    LpRow nr;
    nr.relation = row.relation;
    nr.rhs = row.rhs;
    nr.coeffs.assign(out.reduced.num_vars, 0.0);
    bool all_zero = true;
    for (int j = 0; j < lp.num_vars && j < static_cast<int>(row.coeffs.size()); ++j) {
      if (new_index[j] >= 0 && row.coeffs[j] != 0.0) {
        nr.coeffs[new_index[j]] = row.coeffs[j];
        all_zero = false;
      }
    }
    if (all_zero) {
      const bool ok = (row.relation == '<' && row.rhs >= 0.0) ||
                      (row.relation == '>' && row.rhs <= 0.0) ||
                      (row.relation == '=' && row.rhs == 0.0);
      if (!ok) out.infeasible = true;
      continue;
    }
    out.reduced.rows.push_back(std::move(nr));
  }
  return out;
}

}  // namespace detail

inline LpSolution solve_lp_no_presolve(const LinearProgram& lp) {
  LpSolution sol;
  detail::SimplexTableau tableau(lp);
  sol.x.clear();
  sol.status = tableau.solve(lp.objective, &sol.x, &sol.objective);
  if (sol.status != LpStatus::kOptimal) {
    sol.x.assign(lp.num_vars, 0.0);
    sol.objective = 0.0;
  }
  return sol;
}

// Solve max c.x s.t. rows, x >= 0. Small dense problems only.
inline LpSolution solve_lp(const LinearProgram& lp) {
  detail::PresolveResult pre = detail::presolve_nonneg_rows(lp);
  if (pre.infeasible) {
    LpSolution sol;
    sol.status = LpStatus::kInfeasible;
    sol.x.assign(lp.num_vars, 0.0);
    return sol;
  }
  LpSolution reduced_sol = solve_lp_no_presolve(pre.reduced);
  LpSolution sol;
  sol.status = reduced_sol.status;
  sol.objective = reduced_sol.objective;
  sol.x.assign(lp.num_vars, 0.0);
  if (sol.status == LpStatus::kOptimal)
    for (std::size_t k = 0; k < pre.var_map.size(); ++k) sol.x[pre.var_map[k]] = reduced_sol.x[k];
  return sol;
}

}  // namespace ranslice
