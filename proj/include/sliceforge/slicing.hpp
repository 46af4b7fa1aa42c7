#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sliceforge/errors.hpp"

namespace sliceforge {

// The four orchestration targets. Master is a backup slice only: it is never
// a classifier output class, it absorbs overflow and failure traffic.
enum class SliceKind { Embb = 0, Mmtc = 1, Urllc = 2, Master = 3 };

constexpr std::array<SliceKind, 4> kAllSlices = {SliceKind::Embb, SliceKind::Mmtc,
                                                 SliceKind::Urllc, SliceKind::Master};
constexpr std::array<SliceKind, 3> kServiceSlices = {SliceKind::Embb, SliceKind::Mmtc,
                                                     SliceKind::Urllc};

const char* to_string(SliceKind k);
std::optional<SliceKind> slice_from_string(std::string_view s);

enum class ServiceNeed {
  HighThroughput = 0,
  ReliableLowLatency = 1,
  LowThroughputHighDensity = 2,
  Unmatched = 3,
};

const char* to_string(ServiceNeed n);
std::optional<ServiceNeed> need_from_string(std::string_view s);

enum class AdmitReason {
  PrimaryFit = 0,
  OverflowRedirect = 1,
  FailureRedirect = 2,
  UnmatchedFallback = 3,
  RejectedNoCapacity = 4,
};

const char* to_string(AdmitReason r);
std::optional<AdmitReason> reason_from_string(std::string_view s);

// Maps a service need to the slice that primarily serves it.
SliceKind primary_slice_for(ServiceNeed n);
// Inverse map used when a trained classifier drives routing.
ServiceNeed need_for_slice(SliceKind k);

// Total, deterministic KPI classification.
//   - loss <= 1e-6 with a delay budget <= 50 ms is the reliable low-latency
//     profile (URLLC service).
//   - dense machine-type traffic carries the 60/300 ms budgets at loss >= 1e-3;
//     at loss >= 1e-2 the whole 60..300 ms band counts as machine-type.
//   - remaining budgets in the broadband band 50..300 ms are high-throughput.
//   - anything else (tight budgets without the reliability KPI) is unmatched.
ServiceNeed classify_need(double packet_loss_rate, int packet_delay_budget_ms);

struct AdmissionDecision {
  std::uint64_t request_id = 0;
  std::int64_t time_s = 0;
  ServiceNeed need = ServiceNeed::Unmatched;
  SliceKind target = SliceKind::Master;    // primary slice for the need
  SliceKind assigned = SliceKind::Master;  // meaningful unless rejected
  AdmitReason reason = AdmitReason::RejectedNoCapacity;
  int target_active_before = 0;  // pre-admission occupancy of the target slice
  int target_capacity = 0;
  std::int64_t expiry_s = 0;  // admission time + TTL
};

// Live per-slice record: fixed capacity in unit-cost connection slots, the set
// of active connections keyed by expiry, and a health flag.
class SliceState {
 public:
  SliceState(SliceKind kind, int capacity);

  SliceKind kind() const { return kind_; }
  int capacity() const { return capacity_; }
  int active_count() const { return static_cast<int>(ids_.size()); }
  bool healthy() const { return healthy_; }
  bool full() const { return active_count() >= capacity_; }
  bool contains(std::uint64_t id) const { return ids_.count(id) != 0; }

  // Percentage in [0, 100]. Reporting only; threshold checks go through
  // over_threshold() which stays in integer arithmetic.
  double utilization_pct() const;

  // active*100 > threshold*capacity, evaluated in integers so the boundary is
  // exact at any capacity.
  bool over_threshold(int threshold_pct) const;

  void insert(std::uint64_t id, std::int64_t expiry_s);
  int release_expired(std::int64_t now_s);  // removes every entry with expiry <= now
  int clear_all();
  // Removes and returns all connections ordered by (expiry, id).
  std::vector<std::pair<std::int64_t, std::uint64_t>> drain_sorted();
  void set_healthy(bool h) { healthy_ = h; }

 private:
  SliceKind kind_;
  int capacity_;
  bool healthy_ = true;
  std::multimap<std::int64_t, std::uint64_t> by_expiry_;
  std::unordered_set<std::uint64_t> ids_;
};

struct NetworkConfig {
  // Slot counts per slice, indexed by SliceKind order.
  std::array<int, 4> capacities = {250, 120, 200, 400};
  int overload_threshold_pct = 92;
  // On slice failure, move established connections to the master slice
  // (capacity permitting) instead of dropping them.
  bool rehome_on_failure = false;
};

class NetworkState {
 public:
  explicit NetworkState(const NetworkConfig& cfg);

  SliceState& slice(SliceKind k) { return slices_[static_cast<int>(k)]; }
  const SliceState& slice(SliceKind k) const { return slices_[static_cast<int>(k)]; }
  int threshold_pct() const { return threshold_pct_; }
  bool rehome_on_failure() const { return rehome_; }
  int total_active() const;

  // One request, one decision. A healthy target at or under the threshold
  // takes the connection; an overloaded or failed target redirects it to the
  // master slice; unmatched needs land on the master slice directly. A full
  // master slice rejects, which the caller accounts as a lost request.
  AdmissionDecision admit(std::uint64_t request_id, ServiceNeed need, std::int64_t now_s,
                          int ttl_s);

  // Sweeps every slice; returns total connections released.
  int release_expired(std::int64_t now_s);

  struct HealthChange {
    int dropped = 0;
    int rehomed = 0;
  };

  // Transition a slice's health flag. Going down drops (or rehomes) every
  // established connection on that slice; repeated transitions to the same
  // state are no-ops. The master slice cannot be failed.
  HealthChange set_health(SliceKind k, bool healthy, std::int64_t now_s);

 private:
  std::vector<SliceState> slices_;
  int threshold_pct_;
  bool rehome_;
};

}  // namespace sliceforge
