#pragma once

// Test-only oracles that re-derive simulation observables from the decision
// log with plain vectors: no NetworkState, no expiry index, no priority queue.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "sliceforge/sim.hpp"

namespace sliceforge::testing {

// Recomputes per-slice active counts at the given query times by replaying
// the decision log against the failure schedule (drop semantics, no rehome).
// Query times must be sorted ascending.
inline std::vector<std::array<int, 4>> replay_active_counts(
    const std::vector<AdmissionDecision>& decisions,
    const std::vector<FailureEvent>& failures,
    const std::vector<std::int64_t>& query_times) {
  struct Conn {
    std::int64_t expiry;
  };
  std::array<std::vector<Conn>, 4> live;

  struct Transition {
    std::int64_t time;
    SliceKind slice;
    bool up;
  };
  std::vector<Transition> transitions;
  for (const auto& f : failures) {
    transitions.push_back({f.start_s, f.slice, false});
    transitions.push_back({f.end_s, f.slice, true});
  }
  std::sort(transitions.begin(), transitions.end(),
            [](const Transition& a, const Transition& b) { return a.time < b.time; });

  auto sweep = [&](std::int64_t now) {
    for (auto& slice : live) {
      std::erase_if(slice, [&](const Conn& c) { return c.expiry <= now; });
    }
  };

  std::vector<std::array<int, 4>> out;
  std::size_t di = 0, ti = 0;
  for (std::int64_t q : query_times) {
    // Events strictly before the query time, in (time, rank) order; at equal
    // times failures precede arrivals, and the query observes after both.
    while (true) {
      const bool has_t = ti < transitions.size() && transitions[ti].time <= q;
      const bool has_d = di < decisions.size() && decisions[di].time_s <= q;
      if (!has_t && !has_d) break;
      const bool take_transition =
          has_t && (!has_d || transitions[ti].time <= decisions[di].time_s);
      if (take_transition) {
        sweep(transitions[ti].time);
        if (!transitions[ti].up)
          live[static_cast<int>(transitions[ti].slice)].clear();
        ++ti;
      } else {
        const auto& d = decisions[di];
        sweep(d.time_s);
        if (d.reason != AdmitReason::RejectedNoCapacity)
          live[static_cast<int>(d.assigned)].push_back({d.expiry_s});
        ++di;
      }
    }
    sweep(q);
    std::array<int, 4> counts;
    for (int s = 0; s < 4; ++s) counts[s] = static_cast<int>(live[s].size());
    out.push_back(counts);
  }
  return out;
}

// Totals recomputed by folding the decision log.
inline Totals fold_decisions(const std::vector<AdmissionDecision>& decisions) {
  Totals t;
  t.arrivals = decisions.size();
  for (const auto& d : decisions) {
    switch (d.reason) {
      case AdmitReason::PrimaryFit: ++t.admitted; break;
      case AdmitReason::OverflowRedirect: ++t.overflow_redirected; break;
      case AdmitReason::FailureRedirect: ++t.failure_redirected; break;
      case AdmitReason::UnmatchedFallback: ++t.unmatched_fallback; break;
      case AdmitReason::RejectedNoCapacity: ++t.rejected; break;
    }
  }
  return t;
}

// Straight-line re-execution of a scenario: one pre-sorted event vector and
// index arithmetic instead of the engine's priority queue. Oracle-mode only.
inline SimulationResult straight_line_run(const Scenario& scenario) {
  const auto stream = generate_stream(scenario.traffic, profile_table(), scenario.surge);
  const std::int64_t duration = scenario.traffic.duration_s();

  struct Ev {
    std::int64_t time;
    int rank;  // failure 1, arrival 2, sample 3
    std::uint64_t seq;
    int failure_index = -1;
    bool up = false;
    std::uint32_t arrival = 0;
  };
  std::vector<Ev> events;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < scenario.failures.size(); ++i) {
    events.push_back({scenario.failures[i].start_s, 1, seq++, static_cast<int>(i),
                      false, 0});
    events.push_back({scenario.failures[i].end_s, 1, seq++, static_cast<int>(i),
                      true, 0});
  }
  for (std::size_t i = 0; i < stream.size(); ++i)
    events.push_back({stream[i].arrival_s, 2, seq++, -1, false,
                      static_cast<std::uint32_t>(i)});
  for (std::int64_t t = 0; t + scenario.sample_interval_s <= duration;
       t += scenario.sample_interval_s)
    events.push_back({t, 3, seq++, -1, false, 0});

  std::sort(events.begin(), events.end(), [](const Ev& a, const Ev& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.seq < b.seq;
  });

  NetworkState net(scenario.network);
  SimulationResult result;
  result.totals.arrivals = stream.size();

  for (const Ev& e : events) {
    result.totals.released += static_cast<std::uint64_t>(net.release_expired(e.time));
    if (e.rank == 1) {
      const auto change =
          net.set_health(scenario.failures[static_cast<std::size_t>(e.failure_index)].slice,
                         e.up, e.time);
      result.totals.dropped += static_cast<std::uint64_t>(change.dropped);
      result.totals.rehomed += static_cast<std::uint64_t>(change.rehomed);
    } else if (e.rank == 2) {
      const RequestRecord& r = stream[e.arrival];
      const auto d = net.admit(r.id, classify_need(r), e.time, r.ttl_s);
      switch (d.reason) {
        case AdmitReason::PrimaryFit: ++result.totals.admitted; break;
        case AdmitReason::OverflowRedirect: ++result.totals.overflow_redirected; break;
        case AdmitReason::FailureRedirect: ++result.totals.failure_redirected; break;
        case AdmitReason::UnmatchedFallback: ++result.totals.unmatched_fallback; break;
        case AdmitReason::RejectedNoCapacity: ++result.totals.rejected; break;
      }
      result.decisions.push_back(d);
    } else {
      SampleRow row;
      row.time_s = e.time;
      for (SliceKind k : kAllSlices) {
        row.active[static_cast<int>(k)] = net.slice(k).active_count();
        row.utilization_pct[static_cast<int>(k)] = net.slice(k).utilization_pct();
        row.healthy[static_cast<int>(k)] = net.slice(k).healthy();
      }
      row.admitted = result.totals.admitted;
      row.overflow_redirected = result.totals.overflow_redirected;
      row.failure_redirected = result.totals.failure_redirected;
      row.unmatched_fallback = result.totals.unmatched_fallback;
      row.rejected = result.totals.rejected;
      row.dropped = result.totals.dropped;
      result.samples.push_back(row);
    }
  }
  result.totals.released += static_cast<std::uint64_t>(net.release_expired(duration));
  result.totals.still_active = static_cast<std::uint64_t>(net.total_active());
  return result;
}

inline bool rows_equal(const SampleRow& a, const SampleRow& b) {
  return a.time_s == b.time_s && a.active == b.active &&
         a.utilization_pct == b.utilization_pct && a.healthy == b.healthy &&
         a.admitted == b.admitted && a.overflow_redirected == b.overflow_redirected &&
         a.failure_redirected == b.failure_redirected &&
         a.unmatched_fallback == b.unmatched_fallback && a.rejected == b.rejected &&
         a.dropped == b.dropped;
}

inline bool decisions_equal(const AdmissionDecision& a, const AdmissionDecision& b) {
  return a.request_id == b.request_id && a.time_s == b.time_s && a.need == b.need &&
         a.target == b.target && a.assigned == b.assigned && a.reason == b.reason &&
         a.target_active_before == b.target_active_before &&
         a.target_capacity == b.target_capacity && a.expiry_s == b.expiry_s;
}

}  // namespace sliceforge::testing
