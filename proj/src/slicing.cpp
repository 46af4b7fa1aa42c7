#include "sliceforge/slicing.hpp"

namespace sliceforge {

const char* to_string(SliceKind k) {
  switch (k) {
    case SliceKind::Embb: return "embb";
    case SliceKind::Mmtc: return "mmtc";
    case SliceKind::Urllc: return "urllc";
    case SliceKind::Master: return "master";
  }
  return "?";
}

std::optional<SliceKind> slice_from_string(std::string_view s) {
  if (s == "embb") return SliceKind::Embb;
  if (s == "mmtc") return SliceKind::Mmtc;
  if (s == "urllc") return SliceKind::Urllc;
  if (s == "master") return SliceKind::Master;
  return std::nullopt;
}

const char* to_string(ServiceNeed n) {
  switch (n) {
    case ServiceNeed::HighThroughput: return "high_throughput";
    case ServiceNeed::ReliableLowLatency: return "reliable_low_latency";
    case ServiceNeed::LowThroughputHighDensity: return "low_throughput_high_density";
    case ServiceNeed::Unmatched: return "unmatched";
  }
  return "?";
}

std::optional<ServiceNeed> need_from_string(std::string_view s) {
  if (s == "high_throughput") return ServiceNeed::HighThroughput;
  if (s == "reliable_low_latency") return ServiceNeed::ReliableLowLatency;
  if (s == "low_throughput_high_density") return ServiceNeed::LowThroughputHighDensity;
  if (s == "unmatched") return ServiceNeed::Unmatched;
  return std::nullopt;
}

const char* to_string(AdmitReason r) {
  switch (r) {
    case AdmitReason::PrimaryFit: return "primary_fit";
    case AdmitReason::OverflowRedirect: return "overflow_redirect";
    case AdmitReason::FailureRedirect: return "failure_redirect";
    case AdmitReason::UnmatchedFallback: return "unmatched_fallback";
    case AdmitReason::RejectedNoCapacity: return "rejected_no_capacity";
  }
  return "?";
}

std::optional<AdmitReason> reason_from_string(std::string_view s) {
  if (s == "primary_fit") return AdmitReason::PrimaryFit;
  if (s == "overflow_redirect") return AdmitReason::OverflowRedirect;
  if (s == "failure_redirect") return AdmitReason::FailureRedirect;
  if (s == "unmatched_fallback") return AdmitReason::UnmatchedFallback;
  if (s == "rejected_no_capacity") return AdmitReason::RejectedNoCapacity;
  return std::nullopt;
}

SliceKind primary_slice_for(ServiceNeed n) {
  switch (n) {
    case ServiceNeed::HighThroughput: return SliceKind::Embb;
    case ServiceNeed::ReliableLowLatency: return SliceKind::Urllc;
    case ServiceNeed::LowThroughputHighDensity: return SliceKind::Mmtc;
    case ServiceNeed::Unmatched: return SliceKind::Master;
  }
  return SliceKind::Master;
}

ServiceNeed need_for_slice(SliceKind k) {
  switch (k) {
    case SliceKind::Embb: return ServiceNeed::HighThroughput;
    case SliceKind::Urllc: return ServiceNeed::ReliableLowLatency;
    case SliceKind::Mmtc: return ServiceNeed::LowThroughputHighDensity;
    case SliceKind::Master: return ServiceNeed::Unmatched;
  }
  return ServiceNeed::Unmatched;
}

ServiceNeed classify_need(double packet_loss_rate, int packet_delay_budget_ms) {
  if (packet_loss_rate <= 1e-6 && packet_delay_budget_ms <= 50)
    return ServiceNeed::ReliableLowLatency;
  const bool machine_budget =
      packet_delay_budget_ms == 60 || packet_delay_budget_ms == 300;
  const bool machine_band =
      packet_loss_rate >= 1e-2 && packet_delay_budget_ms >= 60 && packet_delay_budget_ms <= 300;
  if (packet_loss_rate >= 1e-3 && (machine_budget || machine_band))
    return ServiceNeed::LowThroughputHighDensity;
  if (packet_delay_budget_ms >= 50 && packet_delay_budget_ms <= 300)
    return ServiceNeed::HighThroughput;
  return ServiceNeed::Unmatched;
}

SliceState::SliceState(SliceKind kind, int capacity) : kind_(kind), capacity_(capacity) {
  if (capacity <= 0)
    throw ConfigError(std::string("slice capacity must be positive: ") + to_string(kind));
}

double SliceState::utilization_pct() const {
  if (capacity_ <= 0) throw ConfigError("slice capacity must be positive");
  return static_cast<double>(active_count()) * 100.0 / static_cast<double>(capacity_);
}

bool SliceState::over_threshold(int threshold_pct) const {
  return static_cast<std::int64_t>(active_count()) * 100 >
         static_cast<std::int64_t>(threshold_pct) * capacity_;
}

void SliceState::insert(std::uint64_t id, std::int64_t expiry_s) {
  if (full())
    throw ConfigError(std::string("slice is full: ") + to_string(kind_));
  if (!ids_.insert(id).second)
    throw DataError("duplicate connection id " + std::to_string(id) + " on slice " +
                    to_string(kind_));
  by_expiry_.emplace(expiry_s, id);
}

int SliceState::release_expired(std::int64_t now_s) {
  int released = 0;
  auto it = by_expiry_.begin();
  while (it != by_expiry_.end() && it->first <= now_s) {
    ids_.erase(it->second);
    it = by_expiry_.erase(it);
    ++released;
  }
  return released;
}

int SliceState::clear_all() {
  int n = active_count();
  by_expiry_.clear();
  ids_.clear();
  return n;
}

std::vector<std::pair<std::int64_t, std::uint64_t>> SliceState::drain_sorted() {
  std::vector<std::pair<std::int64_t, std::uint64_t>> out;
  out.reserve(by_expiry_.size());
  for (const auto& [expiry, id] : by_expiry_) out.emplace_back(expiry, id);
  by_expiry_.clear();
  ids_.clear();
  return out;
}

NetworkState::NetworkState(const NetworkConfig& cfg)
    : threshold_pct_(cfg.overload_threshold_pct), rehome_(cfg.rehome_on_failure) {
  if (cfg.overload_threshold_pct <= 0 || cfg.overload_threshold_pct > 100)
    throw ConfigError("overload threshold must be in (0, 100]");
  slices_.reserve(kAllSlices.size());
  for (SliceKind k : kAllSlices)
    slices_.emplace_back(k, cfg.capacities[static_cast<int>(k)]);
}

int NetworkState::total_active() const {
  int n = 0;
  for (const auto& s : slices_) n += s.active_count();
  return n;
}

AdmissionDecision NetworkState::admit(std::uint64_t request_id, ServiceNeed need,
                                      std::int64_t now_s, int ttl_s) {
  if (ttl_s <= 0) throw ConfigError("request TTL must be positive");

  const SliceKind target = primary_slice_for(need);
  SliceState& t = slice(target);

  AdmissionDecision d;
  d.request_id = request_id;
  d.time_s = now_s;
  d.need = need;
  d.target = target;
  d.target_active_before = t.active_count();
  d.target_capacity = t.capacity();
  d.expiry_s = now_s + ttl_s;

  if (need != ServiceNeed::Unmatched) {
    if (!t.healthy()) {
      d.reason = AdmitReason::FailureRedirect;
    } else if (t.over_threshold(threshold_pct_) || t.full()) {
      // full() is only reachable at threshold 100; a full slice must still
      // overflow rather than exceed capacity.
      d.reason = AdmitReason::OverflowRedirect;
    } else {
      t.insert(request_id, d.expiry_s);
      d.assigned = target;
      d.reason = AdmitReason::PrimaryFit;
      return d;
    }
  } else {
    d.reason = AdmitReason::UnmatchedFallback;
  }

  SliceState& master = slice(SliceKind::Master);
  d.assigned = SliceKind::Master;
  if (master.full()) {
    d.reason = AdmitReason::RejectedNoCapacity;
    return d;
  }
  master.insert(request_id, d.expiry_s);
  return d;
}

int NetworkState::release_expired(std::int64_t now_s) {
  int released = 0;
  for (auto& s : slices_) released += s.release_expired(now_s);
  return released;
}

NetworkState::HealthChange NetworkState::set_health(SliceKind k, bool healthy,
                                                    std::int64_t now_s) {
  (void)now_s;  // transitions are instantaneous; expiries are swept by the caller
  if (k == SliceKind::Master)
    throw ConfigError("health transitions on the master slice are not supported");

  SliceState& s = slice(k);
  HealthChange out;
  if (s.healthy() && !healthy) {
    if (rehome_) {
      SliceState& master = slice(SliceKind::Master);
      for (const auto& [expiry, id] : s.drain_sorted()) {
        if (master.full()) {
          ++out.dropped;
        } else {
          master.insert(id, expiry);
          ++out.rehomed;
        }
      }
    } else {
      out.dropped = s.clear_all();
    }
  }
  s.set_healthy(healthy);
  return out;
}

}  // namespace sliceforge
