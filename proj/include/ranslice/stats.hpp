#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ranslice {

// Two-sided 95% Student-t critical values; normal approximation past df 30.
inline double student_t_975(int df) {
  static const double table[31] = {0.0,    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                   2.306,  2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
                                   2.120,  2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                   2.064,  2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return table[df];
  return 1.96;
}

struct MeanCi {
  double mean = 0.0;
  double ci_half_width = 0.0;
  bool ci_defined = false;  // needs >= 2 samples
};

inline MeanCi mean_ci95(const std::vector<double>& samples) {
  MeanCi out;
  const std::size_t n = samples.size();
  if (n == 0) return out;
  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0;
    for (double v : samples) ss += (v - out.mean) * (v - out.mean);
    const double stddev = std::sqrt(ss / static_cast<double>(n - 1));
    out.ci_half_width =
        student_t_975(static_cast<int>(n) - 1) * stddev / std::sqrt(static_cast<double>(n));
    out.ci_defined = true;
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// First 1-based TTI from which the trailing moving average stays within
// rel_tol of the final-window mean for the rest of the trace; the trace
// length if it never settles. The earliest answer is the window size.
inline long convergence_tti(const std::vector<double>& trace, int window = 100,
                            long final_window = 2000, double rel_tol = 0.05) {
  const long n = static_cast<long>(trace.size());
  if (n < window || final_window < 1 || final_window > n) return n;
  double final_sum = 0.0;
  for (long t = n - final_window; t < n; ++t) final_sum += trace[t];
  const double final_mean = final_sum / static_cast<double>(final_window);
  const double tol = rel_tol * std::fabs(final_mean) + 1e-12;

  double acc = 0.0;
  std::vector<double> ma(n + 1, 0.0);  // ma[t] = average of trace[t-window .. t-1], 1-based t
  for (long t = 0; t < n; ++t) {
    acc += trace[t];
    if (t >= window) acc -= trace[t - window];
    if (t + 1 >= window) ma[t + 1] = acc / window;
  }
  long answer = n;
  for (long t = n; t >= window; --t) {
    if (std::fabs(ma[t] - final_mean) <= tol)
      answer = t;
    else
      break;
  }
  return answer;
}

}  // namespace ranslice
