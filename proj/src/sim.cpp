#include "sliceforge/sim.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "sliceforge/csv.hpp"

namespace sliceforge {

namespace {

// Tie-break ranks at equal timestamps. Expiries are swept ahead of every
// event, which realizes rank 0.
enum EventRank { kFailureRank = 1, kArrivalRank = 2, kSampleRank = 3 };

struct Event {
  std::int64_t time_s;
  int rank;
  std::uint64_t seq;
  int failure_index = -1;  // >= 0: health transition for failures[failure_index]
  bool failure_up = false;
  std::uint32_t arrival_index = 0;
  bool is_arrival = false;
  bool is_sample = false;
};

struct EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time_s != b.time_s) return a.time_s > b.time_s;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.seq > b.seq;
  }
};

void validate_scenario(const Scenario& s) {
  if (s.sample_interval_s <= 0) throw ConfigError("sample interval must be positive");
  if (s.network.overload_threshold_pct <= 0 || s.network.overload_threshold_pct > 100)
    throw ConfigError("overload threshold must be in (0, 100]");
  for (int c : s.network.capacities)
    if (c <= 0) throw ConfigError("slice capacities must be positive");

  const std::int64_t duration = s.traffic.duration_s();
  std::array<std::vector<std::pair<std::int64_t, std::int64_t>>, 4> per_slice;
  for (const auto& f : s.failures) {
    if (f.slice == SliceKind::Master)
      throw ConfigError("failure events on the master slice are not supported");
    if (f.start_s < 0 || f.start_s >= f.end_s || f.end_s > duration)
      throw ConfigError("failure window must satisfy 0 <= start < end <= duration");
    per_slice[static_cast<int>(f.slice)].emplace_back(f.start_s, f.end_s);
  }
  for (auto& windows : per_slice) {
    std::sort(windows.begin(), windows.end());
    for (std::size_t i = 1; i < windows.size(); ++i)
      if (windows[i].first < windows[i - 1].second)
        throw ConfigError("failure windows on one slice must not overlap");
  }
}

}  // namespace

SimulationResult run(const Scenario& scenario) {
  if (scenario.predictor_mode == PredictorMode::TrainedModel) {
    if (scenario.checkpoint_path.empty())
      throw ConfigError("trained-model mode requires a checkpoint path");
    SlicePredictor model = load_checkpoint(scenario.checkpoint_path);
    if (model.net().input_dim() != kFeatureDim)
      throw CompatError("checkpoint input dimension " +
                        std::to_string(model.net().input_dim()) +
                        " does not match the feature encoding (" +
                        std::to_string(kFeatureDim) + ")");
    if (!(model.bounds() == EncodingBounds{}))
      throw CompatError("checkpoint encoding bounds differ from this build's bounds");
    return run(scenario, &model);
  }
  return run(scenario, nullptr);
}

SimulationResult run(const Scenario& scenario, const SlicePredictor* model) {
  validate_scenario(scenario);
  if (scenario.predictor_mode == PredictorMode::TrainedModel && model == nullptr)
    throw ConfigError("trained-model mode requires a loaded model");

  const std::vector<RequestRecord> stream =
      generate_stream(scenario.traffic, profile_table(), scenario.surge);
  const std::int64_t duration = scenario.traffic.duration_s();

  NetworkState net(scenario.network);

  std::priority_queue<Event, std::vector<Event>, EventOrder> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < scenario.failures.size(); ++i) {
    Event start{scenario.failures[i].start_s, kFailureRank, seq++};
    start.failure_index = static_cast<int>(i);
    start.failure_up = false;
    queue.push(start);
    Event end{scenario.failures[i].end_s, kFailureRank, seq++};
    end.failure_index = static_cast<int>(i);
    end.failure_up = true;
    queue.push(end);
  }
  for (std::size_t i = 0; i < stream.size(); ++i) {
    Event e{stream[i].arrival_s, kArrivalRank, seq++};
    e.is_arrival = true;
    e.arrival_index = static_cast<std::uint32_t>(i);
    queue.push(e);
  }
  // One row per full interval, stamped at the interval start; a trailing
  // partial interval is dropped.
  for (std::int64_t t = 0; t + scenario.sample_interval_s <= duration;
       t += scenario.sample_interval_s) {
    Event e{t, kSampleRank, seq++};
    e.is_sample = true;
    queue.push(e);
  }

  SimulationResult result;
  result.decisions.reserve(stream.size());
  Totals& totals = result.totals;
  totals.arrivals = stream.size();

  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    totals.released += static_cast<std::uint64_t>(net.release_expired(e.time_s));

    if (e.failure_index >= 0) {
      const auto& f = scenario.failures[static_cast<std::size_t>(e.failure_index)];
      const auto change = net.set_health(f.slice, e.failure_up, e.time_s);
      totals.dropped += static_cast<std::uint64_t>(change.dropped);
      totals.rehomed += static_cast<std::uint64_t>(change.rehomed);
    } else if (e.is_arrival) {
      const RequestRecord& r = stream[e.arrival_index];
      ServiceNeed need;
      if (model != nullptr) {
        const SliceKind predicted = model->predict_record(r).slice;
        need = need_for_slice(predicted);
        result.eval_pairs.emplace_back(oracle_label(r), predicted);
      } else {
        need = classify_need(r);
      }
      const AdmissionDecision d = net.admit(r.id, need, e.time_s, r.ttl_s);
      switch (d.reason) {
        case AdmitReason::PrimaryFit: ++totals.admitted; break;
        case AdmitReason::OverflowRedirect: ++totals.overflow_redirected; break;
        case AdmitReason::FailureRedirect: ++totals.failure_redirected; break;
        case AdmitReason::UnmatchedFallback: ++totals.unmatched_fallback; break;
        case AdmitReason::RejectedNoCapacity: ++totals.rejected; break;
      }
      result.decisions.push_back(d);
    } else if (e.is_sample) {
      SampleRow row;
      row.time_s = e.time_s;
      for (SliceKind k : kAllSlices) {
        const auto& s = net.slice(k);
        row.active[static_cast<int>(k)] = s.active_count();
        row.utilization_pct[static_cast<int>(k)] = s.utilization_pct();
        row.healthy[static_cast<int>(k)] = s.healthy();
      }
      row.admitted = totals.admitted;
      row.overflow_redirected = totals.overflow_redirected;
      row.failure_redirected = totals.failure_redirected;
      row.unmatched_fallback = totals.unmatched_fallback;
      row.rejected = totals.rejected;
      row.dropped = totals.dropped;
      result.samples.push_back(row);
    }
  }

  totals.released += static_cast<std::uint64_t>(net.release_expired(duration));
  totals.still_active = static_cast<std::uint64_t>(net.total_active());
  return result;
}

std::vector<std::string> preset_names() {
  return {"baseline-20h", "mmtc-outage", "urllc-outage", "mmtc-overload"};
}

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  // Shared base: 500k requests over 20 hours, 45/20/35 mix, 10-minute samples.
  s.traffic = TrafficMixConfig{};
  s.network = NetworkConfig{};
  s.sample_interval_s = 600;

  if (name == "baseline-20h") return s;
  if (name == "mmtc-outage") {
    // 2:30-4:45 and 13:00-17:00.
    s.failures = {{SliceKind::Mmtc, 9000, 17100}, {SliceKind::Mmtc, 46800, 61200}};
    return s;
  }
  if (name == "urllc-outage") {
    s.failures = {{SliceKind::Urllc, 9000, 17100}};
    return s;
  }
  if (name == "mmtc-overload") {
    // 5x machine-type arrivals for two hours starting at hour 6. The base
    // volume is sized so only the surged slice crosses the threshold and the
    // master slice has room to absorb it.
    s.traffic.total_requests = 125000;
    s.surge = SurgeConfig{SliceKind::Mmtc, 21600, 28800, 5.0};
    return s;
  }

  std::ostringstream os;
  os << "unknown scenario preset '" << name << "'; available:";
  for (const auto& p : preset_names()) os << ' ' << p;
  throw ConfigError(os.str());
}

namespace {

using nlohmann::json;

SliceKind parse_slice(const std::string& token) {
  auto k = slice_from_string(token);
  if (!k) throw ConfigError("unknown slice '" + token + "'");
  return *k;
}

}  // namespace

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario file is not valid JSON: ") + e.what());
  }

  try {
    Scenario s;
    s.name = j.value("name", path);
    if (j.contains("traffic")) {
      const json& t = j.at("traffic");
      s.traffic.total_requests = t.value("total_requests", s.traffic.total_requests);
      s.traffic.duration_hours = t.value("duration_hours", s.traffic.duration_hours);
      s.traffic.fraction_embb = t.value("fraction_embb", s.traffic.fraction_embb);
      s.traffic.fraction_mmtc = t.value("fraction_mmtc", s.traffic.fraction_mmtc);
      s.traffic.fraction_urllc = t.value("fraction_urllc", s.traffic.fraction_urllc);
      s.traffic.seed = t.value("seed", s.traffic.seed);
      s.traffic.pinned_day_of_week = t.value("day_of_week", -1);
      if (t.contains("weather")) {
        const std::string w = t.at("weather");
        if (w == "sample") s.traffic.pinned_weather = -1;
        else if (auto parsed = weather_from_string(w))
          s.traffic.pinned_weather = static_cast<int>(*parsed);
        else throw ConfigError("traffic.weather must be sample, normal, or harsh");
      }
      if (t.contains("arrival_process")) {
        const std::string p = t.at("arrival_process");
        if (p == "uniform") s.traffic.arrival_process = ArrivalProcess::UniformRate;
        else if (p == "poisson") s.traffic.arrival_process = ArrivalProcess::Poisson;
        else throw ConfigError("traffic.arrival_process must be uniform or poisson");
      }
    }
    if (j.contains("capacities")) {
      const json& c = j.at("capacities");
      for (SliceKind k : kAllSlices) {
        if (c.contains(to_string(k)))
          s.network.capacities[static_cast<int>(k)] = c.at(to_string(k));
      }
    }
    s.network.overload_threshold_pct =
        j.value("overload_threshold_pct", s.network.overload_threshold_pct);
    s.network.rehome_on_failure = j.value("rehome_on_failure", false);
    s.sample_interval_s = j.value("sample_interval_s", s.sample_interval_s);
    if (j.contains("failures")) {
      for (const json& f : j.at("failures")) {
        FailureEvent ev;
        ev.slice = parse_slice(f.at("slice"));
        ev.start_s = f.at("start_s");
        ev.end_s = f.at("end_s");
        s.failures.push_back(ev);
      }
    }
    if (j.contains("surge") && !j.at("surge").is_null()) {
      const json& g = j.at("surge");
      SurgeConfig surge;
      surge.slice = parse_slice(g.at("slice"));
      surge.start_s = g.at("start_s");
      surge.end_s = g.at("end_s");
      surge.multiplier = g.at("multiplier");
      s.surge = surge;
    }
    if (j.contains("predictor")) {
      const json& p = j.at("predictor");
      if (p.is_string() && p == "oracle") {
        s.predictor_mode = PredictorMode::Oracle;
      } else if (p.is_object() && p.contains("checkpoint")) {
        s.predictor_mode = PredictorMode::TrainedModel;
        s.checkpoint_path = p.at("checkpoint");
      } else {
        throw ConfigError("predictor must be \"oracle\" or {\"checkpoint\": path}");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario file ") + path + ": " + e.what());
  }
}

Scenario resolve_scenario(const std::string& name_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    return preset_scenario(name_or_path);
  if (name_or_path.find('.') != std::string::npos ||
      name_or_path.find('/') != std::string::npos)
    return load_scenario_file(name_or_path);
  // Not a file-looking token: report it as an unknown preset.
  return preset_scenario(name_or_path);
}

void apply_scale(Scenario& s, double scale) {
  if (scale <= 0.0) throw ConfigError("scale must be positive");
  // Surge arrival counts derive from the base rate, so they scale with it.
  s.traffic.total_requests = static_cast<std::uint64_t>(
      static_cast<double>(s.traffic.total_requests) * scale + 0.5);
}

void write_samples_csv(const std::string& path, const std::vector<SampleRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << "time_s";
  for (SliceKind k : kAllSlices) out << ',' << to_string(k) << "_active";
  for (SliceKind k : kAllSlices) out << ',' << to_string(k) << "_util";
  for (SliceKind k : kAllSlices) out << ',' << to_string(k) << "_healthy";
  out << ",admitted,overflow_redirected,failure_redirected,unmatched_fallback,"
         "rejected,dropped\n";
  for (const auto& r : rows) {
    out << r.time_s;
    for (int s = 0; s < 4; ++s) out << ',' << r.active[s];
    for (int s = 0; s < 4; ++s) out << ',' << csv::format_double(r.utilization_pct[s]);
    for (int s = 0; s < 4; ++s) out << ',' << (r.healthy[s] ? 1 : 0);
    out << ',' << r.admitted << ',' << r.overflow_redirected << ','
        << r.failure_redirected << ',' << r.unmatched_fallback << ',' << r.rejected
        << ',' << r.dropped << '\n';
  }
}

std::vector<SampleRow> read_samples_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  auto need = [&](const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw ConfigError("samples file is missing column: " + name);
    return c;
  };
  const int c_time = need("time_s");
  std::array<int, 4> c_active, c_util, c_healthy;
  for (SliceKind k : kAllSlices) {
    const std::string base = to_string(k);
    c_active[static_cast<int>(k)] = need(base + "_active");
    c_util[static_cast<int>(k)] = need(base + "_util");
    c_healthy[static_cast<int>(k)] = need(base + "_healthy");
  }
  const int c_adm = need("admitted"), c_over = need("overflow_redirected"),
            c_fail = need("failure_redirected"), c_unm = need("unmatched_fallback"),
            c_rej = need("rejected"), c_drop = need("dropped");

  std::vector<SampleRow> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& fields = t.rows[i];
    if (fields.size() < t.header.size())
      throw ConfigError("samples file line " + std::to_string(i + 2) +
                        ": too few fields");
    SampleRow r;
    r.time_s = csv::parse_i64(fields[c_time]);
    for (int s = 0; s < 4; ++s) {
      r.active[s] = static_cast<int>(csv::parse_i64(fields[c_active[s]]));
      r.utilization_pct[s] = csv::parse_f64(fields[c_util[s]]);
      r.healthy[s] = csv::parse_i64(fields[c_healthy[s]]) != 0;
    }
    r.admitted = csv::parse_i64(fields[c_adm]);
    r.overflow_redirected = csv::parse_i64(fields[c_over]);
    r.failure_redirected = csv::parse_i64(fields[c_fail]);
    r.unmatched_fallback = csv::parse_i64(fields[c_unm]);
    r.rejected = csv::parse_i64(fields[c_rej]);
    r.dropped = csv::parse_i64(fields[c_drop]);
    rows.push_back(r);
  }
  return rows;
}

void write_decisions_csv(const std::string& path,
                         const std::vector<AdmissionDecision>& decisions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << "id,time_s,need,target,assigned,reason,target_active_before,"
         "target_capacity,expiry_s\n";
  for (const auto& d : decisions) {
    out << d.request_id << ',' << d.time_s << ',' << to_string(d.need) << ','
        << to_string(d.target) << ','
        << (d.reason == AdmitReason::RejectedNoCapacity ? "none" : to_string(d.assigned))
        << ',' << to_string(d.reason) << ',' << d.target_active_before << ','
        << d.target_capacity << ',' << d.expiry_s << '\n';
  }
}

std::vector<AdmissionDecision> read_decisions_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  auto need = [&](const std::string& name) {
    const int c = t.column(name);
    if (c < 0) throw ConfigError("decisions file is missing column: " + name);
    return c;
  };
  const int c_id = need("id"), c_time = need("time_s"), c_need = need("need"),
            c_target = need("target"), c_assigned = need("assigned"),
            c_reason = need("reason"), c_before = need("target_active_before"),
            c_cap = need("target_capacity"), c_exp = need("expiry_s");

  std::vector<AdmissionDecision> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& fields = t.rows[i];
    if (fields.size() < t.header.size())
      throw ConfigError("decisions file line " + std::to_string(i + 2) +
                        ": too few fields");
    AdmissionDecision d;
    d.request_id = static_cast<std::uint64_t>(csv::parse_i64(fields[c_id]));
    d.time_s = csv::parse_i64(fields[c_time]);
    auto need_v = need_from_string(fields[c_need]);
    auto target_v = slice_from_string(fields[c_target]);
    auto reason_v = reason_from_string(fields[c_reason]);
    if (!need_v || !target_v || !reason_v)
      throw ConfigError("decisions file line " + std::to_string(i + 2) +
                        ": unknown token");
    d.need = *need_v;
    d.target = *target_v;
    d.reason = *reason_v;
    if (d.reason == AdmitReason::RejectedNoCapacity) {
      d.assigned = SliceKind::Master;
    } else {
      auto assigned_v = slice_from_string(fields[c_assigned]);
      if (!assigned_v)
        throw ConfigError("decisions file line " + std::to_string(i + 2) +
                          ": unknown slice '" + fields[c_assigned] + "'");
      d.assigned = *assigned_v;
    }
    d.target_active_before = static_cast<int>(csv::parse_i64(fields[c_before]));
    d.target_capacity = static_cast<int>(csv::parse_i64(fields[c_cap]));
    d.expiry_s = csv::parse_i64(fields[c_exp]);
    out.push_back(d);
  }
  return out;
}

void write_totals_json(const std::string& path, const Totals& t) {
  json j;
  j["arrivals"] = t.arrivals;
  j["admitted"] = t.admitted;
  j["overflow_redirected"] = t.overflow_redirected;
  j["failure_redirected"] = t.failure_redirected;
  j["unmatched_fallback"] = t.unmatched_fallback;
  j["rejected"] = t.rejected;
  j["dropped"] = t.dropped;
  j["rehomed"] = t.rehomed;
  j["released"] = t.released;
  j["still_active"] = t.still_active;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

void write_pairs_csv(const std::string& path,
                     const std::vector<std::pair<SliceKind, SliceKind>>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << "true_slice,predicted_slice\n";
  for (const auto& [truth, predicted] : pairs)
    out << to_string(truth) << ',' << to_string(predicted) << '\n';
}

std::vector<std::pair<SliceKind, SliceKind>> read_pairs_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  const int c_true = t.column("true_slice");
  const int c_pred = t.column("predicted_slice");
  if (c_true < 0 || c_pred < 0)
    throw ConfigError("pairs file needs columns true_slice,predicted_slice");
  std::vector<std::pair<SliceKind, SliceKind>> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& fields = t.rows[i];
    if (fields.size() < t.header.size())
      throw ConfigError("pairs file line " + std::to_string(i + 2) +
                        ": too few fields");
    auto truth = slice_from_string(fields[c_true]);
    auto pred = slice_from_string(fields[c_pred]);
    if (!truth || !pred)
      throw ConfigError("pairs file line " + std::to_string(i + 2) +
                        ": unknown class token");
    out.emplace_back(*truth, *pred);
  }
  return out;
}

std::vector<OverloadWarning> overload_warnings(const std::vector<SampleRow>& samples,
                                               SliceKind slice,
                                               const Forecaster& forecaster,
                                               int threshold_pct) {
  std::vector<OverloadWarning> out;
  const int w = forecaster.window();
  const int idx = static_cast<int>(slice);
  if (static_cast<int>(samples.size()) <= w) return out;

  std::vector<double> window(static_cast<std::size_t>(w));
  for (std::size_t t = static_cast<std::size_t>(w); t < samples.size(); ++t) {
    for (int k = 0; k < w; ++k)
      window[static_cast<std::size_t>(k)] =
          samples[t - static_cast<std::size_t>(w) + static_cast<std::size_t>(k)]
              .utilization_pct[idx];
    const double predicted = forecaster.forecast_next_pct(window);
    if (predicted > static_cast<double>(threshold_pct))
      out.push_back({samples[t].time_s, slice, predicted});
  }
  return out;
}

}  // namespace sliceforge
