#include "sliceforge/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "sliceforge/csv.hpp"
#include "sliceforge/rng.hpp"

namespace sliceforge {

const char* to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::Healthcare: return "healthcare";
    case DeviceClass::IntelligentTransport: return "intelligent_transport";
    case DeviceClass::SmartCity: return "smart_city";
    case DeviceClass::Iot: return "iot";
    case DeviceClass::Smartphone: return "smartphone";
    case DeviceClass::Industry40: return "industry40";
    case DeviceClass::Unknown: return "unknown";
  }
  return "?";
}

std::optional<DeviceClass> device_class_from_string(std::string_view s) {
  for (int i = 0; i < kDeviceClassCount; ++i) {
    auto c = static_cast<DeviceClass>(i);
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

const char* to_string(Weather w) {
  return w == Weather::Normal ? "normal" : "harsh";
}

std::optional<Weather> weather_from_string(std::string_view s) {
  if (s == "normal") return Weather::Normal;
  if (s == "harsh") return Weather::Harsh;
  return std::nullopt;
}

int loss_level_index(double loss_rate) {
  for (std::size_t i = 0; i < kLossLevels.size(); ++i)
    if (loss_rate == kLossLevels[i]) return static_cast<int>(i);
  return -1;
}

std::string loss_token(double loss_rate) {
  switch (loss_level_index(loss_rate)) {
    case 0: return "1e-2";
    case 1: return "1e-3";
    case 2: return "1e-6";
    default: return csv::format_double(loss_rate);
  }
}

const std::vector<DeviceProfile>& profile_table() {
  static const std::vector<DeviceProfile> table = {
      {"healthcare", DeviceClass::Healthcare, {1e-6}, {15}, {200}, {1, 2}, {},
       {SliceKind::Urllc}},
      {"intelligent_transport", DeviceClass::IntelligentTransport, {1e-6}, {15}, {50},
       {3, 4}, {}, {SliceKind::Urllc}},
      {"smart_city", DeviceClass::SmartCity, {1e-3}, {60, 300}, {90}, {1, 2}, {},
       {SliceKind::Mmtc}},
      {"iot", DeviceClass::Iot, {1e-3}, {60, 300}, {50}, {1, 2}, {},
       {SliceKind::Mmtc}},
      {"smartphone", DeviceClass::Smartphone, {1e-3, 1e-6}, {50, 75, 100, 130, 300},
       {250}, {5, 6, 7, 8}, {}, {SliceKind::Embb}},
      {"industry40", DeviceClass::Industry40, {1e-3, 1e-6}, {15, 50}, {160}, {3, 4}, {},
       {SliceKind::Mmtc, SliceKind::Urllc}},
      {"unknown", DeviceClass::Unknown, {1e-3, 1e-6}, {15, 50, 60, 75, 110, 150, 300},
       {40, 110, 190}, {1, 2, 3, 4, 5, 6, 7, 8}, {},
       {SliceKind::Embb, SliceKind::Mmtc, SliceKind::Urllc}},
  };
  return table;
}

namespace {

struct KpiCombo {
  double loss;
  int delay_ms;
};

// For each service class: the profiles that can serve it and, per profile,
// the KPI combinations that classify into that class.
struct CompatibilityIndex {
  std::array<std::vector<int>, 3> profiles_for_class;
  // [class][slot aligned with profiles_for_class[class]]
  std::array<std::vector<std::vector<KpiCombo>>, 3> combos;
};

CompatibilityIndex build_index(const std::vector<DeviceProfile>& profiles) {
  CompatibilityIndex idx;
  for (int p = 0; p < static_cast<int>(profiles.size()); ++p) {
    const DeviceProfile& prof = profiles[p];
    std::array<std::vector<KpiCombo>, 3> per_class;
    for (double loss : prof.loss_choices) {
      for (int delay : prof.delay_choices_ms) {
        ServiceNeed need = classify_need(loss, delay);
        if (need == ServiceNeed::Unmatched) continue;
        SliceKind slice = primary_slice_for(need);
        if (std::find(prof.expected_slices.begin(), prof.expected_slices.end(), slice) ==
            prof.expected_slices.end())
          continue;
        per_class[static_cast<int>(slice)].push_back({loss, delay});
      }
    }
    for (int c = 0; c < 3; ++c) {
      if (!per_class[c].empty()) {
        idx.profiles_for_class[c].push_back(p);
        idx.combos[c].push_back(std::move(per_class[c]));
      }
    }
  }
  return idx;
}

void validate_mix(const TrafficMixConfig& config) {
  const double sum = config.fraction_embb + config.fraction_mmtc + config.fraction_urllc;
  if (config.fraction_embb < 0 || config.fraction_mmtc < 0 || config.fraction_urllc < 0 ||
      std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("traffic mix fractions must be nonnegative and sum to 1");
  if (config.duration_hours <= 0) throw ConfigError("duration_hours must be positive");
  if (config.pinned_day_of_week < -1 || config.pinned_day_of_week > 6)
    throw ConfigError("pinned day_of_week must be -1 or 0..6");
  if (config.pinned_weather < -1 || config.pinned_weather > 1)
    throw ConfigError("pinned weather must be -1, 0, or 1");
}

int derive_qci(int delay_ms, Rng& rng) {
  if (delay_ms <= 50) return rng.next_u64() % 2 == 0 ? 1 : 3;
  if (delay_ms <= 150) return rng.next_u64() % 2 == 0 ? 6 : 7;
  return rng.next_u64() % 2 == 0 ? 8 : 9;
}

// One record with everything except id and arrival filled in. The draw order
// is fixed: class is decided by the caller, then profile, KPI combo, TTL,
// UE category, QCI, day, weather.
RequestRecord draw_record(int class_idx, const CompatibilityIndex& idx,
                          const std::vector<DeviceProfile>& profiles,
                          const TrafficMixConfig& config, Rng& rng) {
  const auto& candidates = idx.profiles_for_class[class_idx];
  const std::size_t slot = rng.below(candidates.size());
  const DeviceProfile& prof = profiles[candidates[slot]];
  const KpiCombo combo = rng.pick(idx.combos[class_idx][slot]);

  RequestRecord r;
  r.device_class = prof.device_class;
  r.packet_loss_rate = combo.loss;
  r.packet_delay_budget_ms = combo.delay_ms;
  r.ttl_s = rng.pick(prof.duration_choices_s);
  r.ue_category = rng.pick(prof.ue_category_choices);
  r.qci = prof.qci_choices.empty() ? derive_qci(combo.delay_ms, rng)
                                   : rng.pick(prof.qci_choices);
  r.day_of_week = config.pinned_day_of_week >= 0 ? config.pinned_day_of_week
                                                 : rng.range(0, 6);
  r.weather = config.pinned_weather >= 0
                  ? static_cast<Weather>(config.pinned_weather)
                  : static_cast<Weather>(rng.below(2));
  return r;
}

std::vector<std::int64_t> arrival_times(std::uint64_t n, std::int64_t duration_s,
                                        ArrivalProcess process, Rng& rng) {
  std::vector<std::int64_t> times;
  times.reserve(n);
  if (process == ArrivalProcess::UniformRate) {
    for (std::uint64_t i = 0; i < n; ++i)
      times.push_back(static_cast<std::int64_t>(
          static_cast<__int128>(i) * duration_s / static_cast<std::int64_t>(n)));
  } else {
    const double rate = static_cast<double>(n) / static_cast<double>(duration_s);
    double t = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      t += -std::log(1.0 - rng.next_real()) / rate;
      auto s = static_cast<std::int64_t>(t);
      times.push_back(std::min(s, duration_s - 1));
    }
  }
  return times;
}

std::vector<RequestRecord> generate_substream(const TrafficMixConfig& config,
                                              const std::vector<DeviceProfile>& profiles,
                                              const CompatibilityIndex& idx,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RequestRecord> out;
  out.reserve(config.total_requests);
  if (config.total_requests == 0) return out;

  // Arrival times first for the uniform process; Poisson interleaves the gap
  // draw per record, so both paths consume the stream in a fixed order.
  std::vector<std::int64_t> times;
  if (config.arrival_process == ArrivalProcess::UniformRate)
    times = arrival_times(config.total_requests, config.duration_s(),
                          config.arrival_process, rng);

  const double f_embb = config.fraction_embb;
  const double f_mmtc = config.fraction_mmtc;
  double poisson_t = 0.0;
  const double rate = static_cast<double>(config.total_requests) /
                      static_cast<double>(config.duration_s());

  for (std::uint64_t i = 0; i < config.total_requests; ++i) {
    std::int64_t arrival;
    if (config.arrival_process == ArrivalProcess::UniformRate) {
      arrival = times[i];
    } else {
      poisson_t += -std::log(1.0 - rng.next_real()) / rate;
      arrival = std::min(static_cast<std::int64_t>(poisson_t), config.duration_s() - 1);
    }

    const double u = rng.next_real();
    int class_idx;
    if (u < f_embb)
      class_idx = static_cast<int>(SliceKind::Embb);
    else if (u < f_embb + f_mmtc)
      class_idx = static_cast<int>(SliceKind::Mmtc);
    else
      class_idx = static_cast<int>(SliceKind::Urllc);

    RequestRecord r = draw_record(class_idx, idx, profiles, config, rng);
    r.id = i;
    r.arrival_s = arrival;
    r.hour_of_day = static_cast<int>((arrival / 3600) % 24);
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<RequestRecord> generate_stream(const TrafficMixConfig& config,
                                           const std::vector<DeviceProfile>& profiles) {
  return generate_stream(config, profiles, std::nullopt);
}

std::vector<RequestRecord> generate_stream(const TrafficMixConfig& config,
                                           const std::vector<DeviceProfile>& profiles,
                                           const std::optional<SurgeConfig>& surge) {
  validate_mix(config);
  CompatibilityIndex idx = build_index(profiles);
  for (int c = 0; c < 3; ++c) {
    if (idx.profiles_for_class[c].empty())
      throw ConfigError(std::string("no device profile is compatible with slice class ") +
                        to_string(static_cast<SliceKind>(c)));
  }

  std::vector<RequestRecord> stream =
      generate_substream(config, profiles, idx, config.seed);

  if (surge) {
    if (surge->start_s < 0 || surge->end_s <= surge->start_s ||
        surge->end_s > config.duration_s())
      throw ConfigError("surge window must lie inside the scenario duration");
    if (surge->multiplier <= 1.0)
      throw ConfigError("surge multiplier must exceed 1");
    if (surge->slice == SliceKind::Master)
      throw ConfigError("surge slice must be a service slice");

    double fraction = 0.0;
    switch (surge->slice) {
      case SliceKind::Embb: fraction = config.fraction_embb; break;
      case SliceKind::Mmtc: fraction = config.fraction_mmtc; break;
      case SliceKind::Urllc: fraction = config.fraction_urllc; break;
      default: break;
    }
    const double base_rate =
        static_cast<double>(config.total_requests) * fraction / config.duration_s();
    const auto extra = static_cast<std::uint64_t>(
        base_rate * (surge->multiplier - 1.0) * (surge->end_s - surge->start_s) + 0.5);

    if (extra > 0) {
      TrafficMixConfig surge_cfg = config;
      surge_cfg.fraction_embb = surge->slice == SliceKind::Embb ? 1.0 : 0.0;
      surge_cfg.fraction_mmtc = surge->slice == SliceKind::Mmtc ? 1.0 : 0.0;
      surge_cfg.fraction_urllc = surge->slice == SliceKind::Urllc ? 1.0 : 0.0;
      surge_cfg.total_requests = extra;
      surge_cfg.duration_hours =
          static_cast<double>(surge->end_s - surge->start_s) / 3600.0;

      std::vector<RequestRecord> burst =
          generate_substream(surge_cfg, profiles, idx, derive_seed(config.seed, 1));
      for (auto& r : burst) {
        r.arrival_s += surge->start_s;
        r.hour_of_day = static_cast<int>((r.arrival_s / 3600) % 24);
      }
      stream.insert(stream.end(), burst.begin(), burst.end());
      std::stable_sort(stream.begin(), stream.end(),
                       [](const RequestRecord& a, const RequestRecord& b) {
                         return a.arrival_s < b.arrival_s;
                       });
      for (std::size_t i = 0; i < stream.size(); ++i)
        stream[i].id = i;
    }
  }
  return stream;
}

const char* const kDatasetHeader =
    "id,arrival_s,device_class,ue_category,qci,packet_loss_rate,"
    "packet_delay_budget_ms,day_of_week,hour_of_day,weather,ttl_s";

void write_dataset(const std::string& path, const std::vector<RequestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);
  out << kDatasetHeader << '\n';
  for (const auto& r : records) {
    out << r.id << ',' << r.arrival_s << ',' << to_string(r.device_class) << ','
        << r.ue_category << ',' << r.qci << ',' << loss_token(r.packet_loss_rate) << ','
        << r.packet_delay_budget_ms << ',' << r.day_of_week << ',' << r.hour_of_day << ','
        << to_string(r.weather) << ',' << r.ttl_s << '\n';
  }
}

DatasetLoad load_dataset(const std::string& path) {
  csv::Table table = csv::read_file(path);

  const std::vector<std::string> required = {
      "id", "arrival_s", "device_class", "ue_category", "qci", "packet_loss_rate",
      "packet_delay_budget_ms", "day_of_week", "hour_of_day", "weather", "ttl_s"};
  std::vector<int> col(required.size());
  for (std::size_t i = 0; i < required.size(); ++i) {
    col[i] = table.column(required[i]);
    if (col[i] < 0) throw ConfigError("dataset is missing column: " + required[i]);
  }

  DatasetLoad out;
  std::unordered_set<std::uint64_t> seen_ids;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    const int line = static_cast<int>(row) + 2;  // header is line 1
    const auto& fields = table.rows[row];
    if (fields.size() < table.header.size()) {
      out.errors.push_back({line, "too few fields"});
      continue;
    }
    auto field = [&](std::size_t i) -> const std::string& {
      return fields[static_cast<std::size_t>(col[i])];
    };
    try {
      RequestRecord r;
      const std::int64_t id = csv::parse_i64(field(0));
      if (id < 0) throw ConfigError("id must be nonnegative");
      r.id = static_cast<std::uint64_t>(id);
      if (!seen_ids.insert(r.id).second)
        throw ConfigError("duplicate id " + std::to_string(r.id));
      r.arrival_s = csv::parse_i64(field(1));
      if (r.arrival_s < 0) throw ConfigError("arrival_s must be nonnegative");
      auto dc = device_class_from_string(field(2));
      if (!dc) throw ConfigError("unknown device_class '" + field(2) + "'");
      r.device_class = *dc;
      r.ue_category = static_cast<int>(csv::parse_i64(field(3)));
      if (r.ue_category < 1 || r.ue_category > 8)
        throw ConfigError("ue_category out of range 1..8");
      r.qci = static_cast<int>(csv::parse_i64(field(4)));
      if (r.qci < 1 || r.qci > 9) throw ConfigError("qci out of range 1..9");
      r.packet_loss_rate = csv::parse_f64(field(5));
      if (loss_level_index(r.packet_loss_rate) < 0)
        throw ConfigError("packet_loss_rate must be one of 1e-2, 1e-3, 1e-6");
      r.packet_delay_budget_ms = static_cast<int>(csv::parse_i64(field(6)));
      if (r.packet_delay_budget_ms < 10 || r.packet_delay_budget_ms > 300)
        throw ConfigError("packet_delay_budget_ms out of range 10..300");
      r.day_of_week = static_cast<int>(csv::parse_i64(field(7)));
      if (r.day_of_week < 0 || r.day_of_week > 6)
        throw ConfigError("day_of_week out of range 0..6");
      r.hour_of_day = static_cast<int>(csv::parse_i64(field(8)));
      if (r.hour_of_day < 0 || r.hour_of_day > 23)
        throw ConfigError("hour_of_day out of range 0..23");
      auto w = weather_from_string(field(9));
      if (!w) throw ConfigError("unknown weather '" + field(9) + "'");
      r.weather = *w;
      r.ttl_s = static_cast<int>(csv::parse_i64(field(10)));
      if (r.ttl_s < 1 || r.ttl_s > 600) throw ConfigError("ttl_s out of range 1..600");
      out.records.push_back(r);
    } catch (const ConfigError& e) {
      out.errors.push_back({line, e.what()});
    }
  }
  return out;
}

namespace {

double normalize(double v, double lo, double hi, const char* what) {
  if (v < lo || v > hi)
    throw DataError(std::string(what) + " outside documented encoding bounds");
  return (v - lo) / (hi - lo);
}

}  // namespace

std::vector<double> encode_features(const RequestRecord& r, const EncodingBounds& b) {
  std::vector<double> f(kFeatureDim, 0.0);
  f[0] = normalize(r.packet_delay_budget_ms, b.delay_min, b.delay_max, "delay budget");
  f[1] = normalize(r.ttl_s, b.ttl_min, b.ttl_max, "ttl");
  f[2] = normalize(r.hour_of_day, b.hour_min, b.hour_max, "hour of day");
  f[3] = normalize(r.ue_category, b.ue_min, b.ue_max, "ue category");

  f[4 + static_cast<int>(r.device_class)] = 1.0;
  f[11 + static_cast<int>(r.weather)] = 1.0;
  if (r.day_of_week < 0 || r.day_of_week > 6) throw DataError("day_of_week out of range");
  f[13 + r.day_of_week] = 1.0;
  if (r.qci < 1 || r.qci > 9) throw DataError("qci out of range");
  f[20 + (r.qci - 1)] = 1.0;
  const int loss = loss_level_index(r.packet_loss_rate);
  if (loss < 0) throw DataError("packet_loss_rate is not a known level");
  f[29 + loss] = 1.0;
  return f;
}

}  // namespace sliceforge
