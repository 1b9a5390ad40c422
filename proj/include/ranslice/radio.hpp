#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranslice/rng.hpp"

namespace ranslice {

enum class Slice { kUrllc = 0, kEmbb = 1 };

inline const char* to_string(Slice s) { return s == Slice::kUrllc ? "urllc" : "embb"; }

struct RadioParams {
  int num_cells = 5;
  double inter_site_m = 500.0;
  double cell_radius_m = 250.0;
  double min_distance_m = 10.0;
  int embb_ues_per_cell = 5;
  int urllc_ues_per_cell = 10;
  int num_rbs = 100;
  int num_groups = 13;
  double rb_bandwidth_hz = 180e3;  // 12 subcarriers x 15 kHz
  double tx_power_dbm = 40.0;      // per cell, split uniformly over RBs
  double noise_dbm_hz = -174.0;
  double antenna_gain_db = 15.0;   // combined Tx/Rx
  double shadowing_sigma_db = 8.0;
};

// 128.1 + 37.6 log10(d[km]), distance clamped below at 10 m
inline double path_loss_db(double distance_km) {
  const double d = std::max(distance_km, 0.01);
  return 128.1 + 37.6 * std::log10(d);
}

struct Ue {
  int id = 0;  // global, cell-major; eMBB UEs listed before URLLC within a cell
  int cell = 0;
  Slice slice = Slice::kUrllc;
  double x = 0.0;
  double y = 0.0;
};

// gNBs on a line at the configured spacing; UEs uniform in each cell's disc.
struct NetworkTopology {
  std::vector<double> gnb_x;
  std::vector<double> gnb_y;
  std::vector<Ue> ues;
  int ues_per_cell = 0;

  int num_cells() const { return static_cast<int>(gnb_x.size()); }
  int num_ues() const { return static_cast<int>(ues.size()); }

  double distance_m(int cell, int ue) const {
    const double dx = ues[ue].x - gnb_x[cell];
    const double dy = ues[ue].y - gnb_y[cell];
    return std::sqrt(dx * dx + dy * dy);
  }
};

inline NetworkTopology make_topology(const RadioParams& params, Rng& rng) {
  NetworkTopology topo;
  topo.ues_per_cell = params.embb_ues_per_cell + params.urllc_ues_per_cell;
  for (int c = 0; c < params.num_cells; ++c) {
    topo.gnb_x.push_back(c * params.inter_site_m);
    topo.gnb_y.push_back(0.0);
  }
  int next_id = 0;
  for (int c = 0; c < params.num_cells; ++c) {
    for (int k = 0; k < topo.ues_per_cell; ++k) {
      Ue ue;
      ue.id = next_id++;
      ue.slice = (k < params.embb_ues_per_cell) ? Slice::kEmbb : Slice::kUrllc;
      const double radius = params.cell_radius_m * std::sqrt(rng.uniform01());
      const double angle = rng.uniform01() * 2.0 * 3.14159265358979323846;
      ue.x = topo.gnb_x[c] + radius * std::cos(angle);
      ue.y = topo.gnb_y[c] + radius * std::sin(angle);
      // nearest-gNB association; the spawning cell wins distance ties
      ue.cell = c;
      double best = std::hypot(ue.x - topo.gnb_x[c], ue.y - topo.gnb_y[c]);
      for (int j = 0; j < params.num_cells; ++j) {
        const double d = std::hypot(ue.x - topo.gnb_x[j], ue.y - topo.gnb_y[j]);
        if (d < best) {
          best = d;
          ue.cell = j;
        }
      }
      topo.ues.push_back(ue);
    }
  }
  return topo;
}

// Static per-link gains: path loss + one log-normal shadowing draw per link
// per run (block shadowing, no fast fading) + combined antenna gain.
struct ChannelState {
  std::vector<std::vector<double>> gain;  // [cell][ue], linear power gain
  double tx_power_per_rb_mw = 0.0;
  double noise_per_rb_mw = 0.0;
  double rb_bandwidth_hz = 0.0;
};

inline ChannelState make_channels(const NetworkTopology& topo, const RadioParams& params,
                                  Rng& shadow_rng) {
  ChannelState ch;
  ch.rb_bandwidth_hz = params.rb_bandwidth_hz;
  ch.tx_power_per_rb_mw = std::pow(10.0, params.tx_power_dbm / 10.0) / params.num_rbs;
  ch.noise_per_rb_mw = std::pow(10.0, params.noise_dbm_hz / 10.0) * params.rb_bandwidth_hz;
  ch.gain.assign(topo.num_cells(), std::vector<double>(topo.num_ues(), 0.0));
  for (int c = 0; c < topo.num_cells(); ++c) {
    for (int u = 0; u < topo.num_ues(); ++u) {
      const double pl = path_loss_db(topo.distance_m(c, u) / 1000.0);
      const double shadow = shadow_rng.normal(0.0, params.shadowing_sigma_db);
      const double gain_db = -pl + params.antenna_gain_db + shadow;
      ch.gain[c][u] = std::pow(10.0, gain_db / 10.0);
      if (!(ch.gain[c][u] > 0.0) || !std::isfinite(ch.gain[c][u]))
        throw std::runtime_error("channel gain out of range");
    }
  }
  return ch;
}

// 100 RBs in 13 groups: 12 groups of 8 plus one of 4.
struct RbGrid {
  int num_rbs = 100;
  int num_groups = 13;
  std::vector<int> group_begin;  // size num_groups + 1

  static RbGrid make(int num_rbs = 100, int num_groups = 13) {
    RbGrid grid;
    grid.num_rbs = num_rbs;
    grid.num_groups = num_groups;
    const int base = num_rbs / num_groups + 1;  // 8 for 100/13
    grid.group_begin.resize(num_groups + 1);
    int rb = 0;
    for (int g = 0; g < num_groups; ++g) {
      grid.group_begin[g] = rb;
      const int remaining_groups = num_groups - g;
      const int size = std::min(base, num_rbs - rb - (remaining_groups - 1));
      rb += size;
    }
    grid.group_begin[num_groups] = num_rbs;
    if (rb != num_rbs) throw std::runtime_error("RB grid: group sizes do not cover the band");
    return grid;
  }

  int group_size(int g) const { return group_begin[g + 1] - group_begin[g]; }
};

// Per-TTI ownership map: RB -> UE within each cell, -1 when idle.
// An owned RB is transmitting; groups are only awarded to backlogged UEs.
struct RbAllocation {
  int num_cells = 0;
  int num_rbs = 0;
  std::vector<int> owner;  // [cell * num_rbs + rb]

  RbAllocation() = default;
  RbAllocation(int cells, int rbs) : num_cells(cells), num_rbs(rbs), owner(cells * rbs, -1) {}

  void clear() { std::fill(owner.begin(), owner.end(), -1); }
  int owner_at(int cell, int rb) const { return owner[cell * num_rbs + rb]; }
  void assign(int cell, int rb, int ue) { owner[cell * num_rbs + rb] = ue; }
};

// Eq.-style SINR on one RB: same-index RBs of other cells interfere when owned.
inline double sinr_linear(int ue, int rb, const RbAllocation& alloc, const ChannelState& ch,
                          const NetworkTopology& topo) {
  const int serving = topo.ues[ue].cell;
  const double signal = ch.tx_power_per_rb_mw * ch.gain[serving][ue];
  double interference = 0.0;
  for (int c = 0; c < alloc.num_cells; ++c) {
    if (c == serving) continue;
    if (alloc.owner_at(c, rb) >= 0) interference += ch.tx_power_per_rb_mw * ch.gain[c][ue];
  }
  return signal / (ch.noise_per_rb_mw + interference);
}

// Shannon capacity over a set of owned RBs, bits/s.
inline double link_capacity_bps(int ue, const std::vector<int>& rbs, const RbAllocation& alloc,
                                const ChannelState& ch, const NetworkTopology& topo) {
  double total = 0.0;
  for (int rb : rbs)
    total += ch.rb_bandwidth_hz * std::log2(1.0 + sinr_linear(ue, rb, alloc, ch, topo));
  return total;
}

inline double transmission_delay_s(double packet_bits, double capacity_bps) {
  if (capacity_bps <= 0.0) return std::numeric_limits<double>::infinity();
  return packet_bits / capacity_bps;
}

// Worst-case (all interferers active) per-RB rate; static per run because the
// gains are flat across frequency. Used for scheduler metrics and estimates.
inline std::vector<double> worst_case_rb_rate_bps(const NetworkTopology& topo,
                                                  const ChannelState& ch) {
  std::vector<double> rate(topo.num_ues(), 0.0);
  for (int u = 0; u < topo.num_ues(); ++u) {
    const int serving = topo.ues[u].cell;
    const double signal = ch.tx_power_per_rb_mw * ch.gain[serving][u];
    double interference = 0.0;
    for (int c = 0; c < topo.num_cells(); ++c)
      if (c != serving) interference += ch.tx_power_per_rb_mw * ch.gain[c][u];
    rate[u] = ch.rb_bandwidth_hz * std::log2(1.0 + signal / (ch.noise_per_rb_mw + interference));
  }
  return rate;
}

inline std::string topology_to_text(const NetworkTopology& topo, const ChannelState& ch) {
  std::ostringstream os;
  os << "# gnb_id x y\n";
  for (int c = 0; c < topo.num_cells(); ++c)
    os << c << ' ' << topo.gnb_x[c] << ' ' << topo.gnb_y[c] << '\n';
  os << "# ue_id cell slice x y serving_gain\n";
  for (const auto& ue : topo.ues)
    os << ue.id << ' ' << ue.cell << ' ' << to_string(ue.slice) << ' ' << ue.x << ' ' << ue.y
       << ' ' << ch.gain[ue.cell][ue.id] << '\n';
  return os.str();
}

}  // namespace ranslice
