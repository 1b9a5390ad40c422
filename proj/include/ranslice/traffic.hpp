#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "ranslice/rng.hpp"

namespace ranslice {

// Delay bookkeeping is integer TTIs: every TTI of a packet's life between
// arrival and completion is exactly one of waited / transmitting / HARQ limbo,
// so d = d_tx + d_que + d_rtx holds exactly after scaling by the TTI length.
struct Packet {
  long id = 0;
  int ue = 0;
  int size_bits = 256;
  long arrival_tti = 0;
  long service_start_tti = -1;
  long completion_tti = -1;
  int retx_count = 0;
  bool dropped = false;
  long waited_ttis = 0;
  long tx_ttis = 0;
  long limbo_ttis = 0;
  double residual_bits = 256.0;
  long tx_mark_tti = -1;  // internal: last TTI with bits sent

  double d_que_ms(double tti_ms) const { return waited_ttis * tti_ms; }
  double d_tx_ms(double tti_ms) const { return tx_ttis * tti_ms; }
  double d_rtx_ms(double tti_ms) const { return limbo_ttis * tti_ms; }
  double total_delay_ms(double tti_ms) const {
    return (waited_ttis + tx_ttis + limbo_ttis) * tti_ms;
  }
};

struct HarqParams {
  double bler_k = 0.5;
  double bler_sinr_min = 1.0;  // linear
  int rtt_ttis = 4;
  int max_retx = 3;
};

// BLER(sinr) = min(1, exp(-k (sinr - sinr_min))), sinr linear
inline double harq_bler(double sinr_linear, const HarqParams& p) {
  return std::min(1.0, std::exp(-p.bler_k * (sinr_linear - p.bler_sinr_min)));
}

enum class HarqOutcome { kSuccess, kRetx, kDrop };

// Roll one completed transmission. kRetx schedules a head-of-line re-entry
// after the HARQ round trip; the fourth consecutive failure drops the packet.
inline HarqOutcome harq_step(Packet& packet, double sinr_linear, const HarqParams& params,
                             Rng& rng) {
  if (rng.uniform01() >= harq_bler(sinr_linear, params)) return HarqOutcome::kSuccess;
  if (packet.retx_count >= params.max_retx) return HarqOutcome::kDrop;
  ++packet.retx_count;
  packet.residual_bits = packet.size_bits;
  return HarqOutcome::kRetx;
}

// Poisson plus constant-bit-rate arrivals for one slice of one cell.
struct TrafficSource {
  double poisson_lambda = 0.0;   // packets per TTI
  double cbr_bits_per_tti = 0.0;
  int packet_bits = 256;
  double cbr_accumulator = 0.0;

  static TrafficSource make(double load_bps, double cbr_fraction, double tti_s, int packet_bits) {
    TrafficSource src;
    src.packet_bits = packet_bits;
    src.poisson_lambda = (1.0 - cbr_fraction) * load_bps * tti_s / packet_bits;
    src.cbr_bits_per_tti = cbr_fraction * load_bps * tti_s;
    return src;
  }

  // Arrival count this TTI; CBR uses a bit accumulator so the long-run rate
  // matches the configured share exactly.
  int draw_arrivals(Rng& rng) {
    int count = (poisson_lambda > 0.0) ? rng.poisson(poisson_lambda) : 0;
    cbr_accumulator += cbr_bits_per_tti;
    while (cbr_accumulator >= packet_bits) {
      cbr_accumulator -= packet_bits;
      ++count;
    }
    return count;
  }
};

struct ServeStats {
  double delivered_bits = 0.0;
  int completed = 0;
  int harq_drops = 0;
  std::vector<Packet> finished;  // completed or dropped this TTI (trace/KPIs)
};

// FIFO queues for one slice of one cell: per-UE sub-queues plus a HARQ limbo
// list. |H_t| counts live queued packets only; limbo packets rejoin at the
// head of their UE queue when the round trip elapses.
class SliceQueue {
 public:
  explicit SliceQueue(std::vector<int> ue_ids) : ue_ids_(std::move(ue_ids)) {
    queues_.resize(ue_ids_.size());
    for (std::size_t k = 0; k < ue_ids_.size(); ++k) slot_of_ue_[ue_ids_[k]] = k;
  }

  const std::vector<int>& ue_ids() const { return ue_ids_; }

  void add_arrival(const Packet& p) {
    queues_[slot(p.ue)].push_back(p);
    ++arrivals_;
  }

  // HARQ re-entries due at this TTI go to the head of their UE queue,
  // oldest first so FIFO-by-arrival is preserved among them.
  void step_reentries(long tti) {
    std::stable_sort(limbo_.begin(), limbo_.end(), [](const LimboEntry& a, const LimboEntry& b) {
      if (a.reentry_tti != b.reentry_tti) return a.reentry_tti < b.reentry_tti;
      if (a.packet.arrival_tti != b.packet.arrival_tti)
        return a.packet.arrival_tti > b.packet.arrival_tti;
      return a.packet.id > b.packet.id;
    });
    // newest first above, so pushing to front leaves oldest at the head
    std::vector<LimboEntry> keep;
    for (auto& entry : limbo_) {
      if (entry.reentry_tti <= tti) {
        queues_[slot(entry.packet.ue)].push_front(entry.packet);
      } else {
        keep.push_back(std::move(entry));
      }
    }
    limbo_ = std::move(keep);
  }

  // Remove queued packets whose age strictly exceeds the deadline.
  int drop_expired(long tti, long deadline_ttis, std::vector<Packet>* dropped_out = nullptr) {
    int dropped = 0;
    for (auto& q : queues_) {
      for (std::size_t k = 0; k < q.size();) {
        if (tti - q[k].arrival_tti > deadline_ttis) {
          q[k].dropped = true;
          if (dropped_out) dropped_out->push_back(q[k]);
          q.erase(q.begin() + k);
          ++dropped;
        } else {
          ++k;
        }
      }
    }
    drops_ += dropped;
    return dropped;
  }

  // FIFO service of one UE within its bit budget for this TTI. Each packet
  // whose transmission completes rolls HARQ once; failures re-enter after the
  // round trip or drop out after max_retx failed retransmissions.
  void serve_ue(int ue, double budget_bits, long tti, double sinr_linear,
                const HarqParams& harq, Rng& harq_rng, ServeStats* stats) {
    auto& q = queues_[slot(ue)];
    while (!q.empty() && budget_bits > 0.0) {
      Packet& p = q.front();
      if (p.service_start_tti < 0) p.service_start_tti = tti;
      if (p.tx_mark_tti != tti) {
        p.tx_mark_tti = tti;
        ++p.tx_ttis;
      }
      const double sent = std::min(p.residual_bits, budget_bits);
      p.residual_bits -= sent;
      budget_bits -= sent;
      if (p.residual_bits > 0.0) break;  // budget exhausted mid-packet
      Packet done = p;
      q.pop_front();
      switch (harq_step(done, sinr_linear, harq, harq_rng)) {
        case HarqOutcome::kSuccess: {
          done.completion_tti = tti;
          ++served_;
          if (stats) {
            stats->delivered_bits += done.size_bits;
            ++stats->completed;
            stats->finished.push_back(done);
          }
          break;
        }
        case HarqOutcome::kRetx: {
          LimboEntry entry;
          entry.reentry_tti = tti + harq.rtt_ttis + 1;
          entry.packet = done;
          limbo_.push_back(std::move(entry));
          break;
        }
        case HarqOutcome::kDrop: {
          done.dropped = true;
          ++drops_;
          if (stats) {
            ++stats->harq_drops;
            stats->finished.push_back(done);
          }
          break;
        }
      }
    }
  }

  // End-of-TTI pass: queued packets that sent nothing this TTI waited; limbo
  // packets accrue retransmission delay.
  void finish_tti(long tti) {
    for (auto& q : queues_)
      for (auto& p : q)
        if (p.tx_mark_tti != tti) ++p.waited_ttis;
    for (auto& entry : limbo_) ++entry.packet.limbo_ttis;
  }

  int queue_length() const {
    int n = 0;
    for (const auto& q : queues_) n += static_cast<int>(q.size());
    return n;
  }

  int limbo_length() const { return static_cast<int>(limbo_.size()); }

  double backlog_bits(int ue) const {
    double bits = 0.0;
    for (const auto& p : queues_[slot(ue)]) bits += p.residual_bits;
    return bits;
  }

  double total_backlog_bits() const {
    double bits = 0.0;
    for (std::size_t k = 0; k < queues_.size(); ++k)
      for (const auto& p : queues_[k]) bits += p.residual_bits;
    return bits;
  }

  bool has_backlog(int ue) const { return !queues_[slot(ue)].empty(); }

  long max_waited_ttis() const {
    long w = -1;
    for (const auto& q : queues_)
      for (const auto& p : q) w = std::max(w, p.waited_ttis);
    return w;  // -1 when empty
  }

  long arrivals() const { return arrivals_; }
  long served() const { return served_; }
  long drops() const { return drops_; }

  // arrivals = served + dropped + live + limbo, checked every TTI
  bool conserves() const {
    return arrivals_ == served_ + drops_ + queue_length() + limbo_length();
  }

 private:
  struct LimboEntry {
    long reentry_tti = 0;
    Packet packet;
  };

  std::size_t slot(int ue) const {
    auto it = slot_of_ue_.find(ue);
    if (it == slot_of_ue_.end()) throw std::out_of_range("SliceQueue: unknown ue");
    return it->second;
  }

  std::vector<int> ue_ids_;
  std::vector<std::deque<Packet>> queues_;
  std::vector<LimboEntry> limbo_;
  std::map<int, std::size_t> slot_of_ue_;
  long arrivals_ = 0;
  long served_ = 0;
  long drops_ = 0;
};

}  // namespace ranslice
