#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sliceforge/slicing.hpp"

namespace sliceforge {

enum class DeviceClass {
  Healthcare = 0,
  IntelligentTransport = 1,
  SmartCity = 2,
  Iot = 3,
  Smartphone = 4,
  Industry40 = 5,
  Unknown = 6,
};
constexpr int kDeviceClassCount = 7;

const char* to_string(DeviceClass c);
std::optional<DeviceClass> device_class_from_string(std::string_view s);

enum class Weather { Normal = 0, Harsh = 1 };

const char* to_string(Weather w);
std::optional<Weather> weather_from_string(std::string_view s);

// The discrete packet-loss levels the KPI schema uses.
constexpr std::array<double, 3> kLossLevels = {1e-2, 1e-3, 1e-6};
// -1 if the value is not one of the levels.
int loss_level_index(double loss_rate);
std::string loss_token(double loss_rate);

struct RequestRecord {
  std::uint64_t id = 0;
  std::int64_t arrival_s = 0;
  DeviceClass device_class = DeviceClass::Unknown;
  int ue_category = 1;
  int qci = 9;  // 1..9
  double packet_loss_rate = 1e-3;
  int packet_delay_budget_ms = 100;
  int day_of_week = 0;  // 0..6
  int hour_of_day = 0;  // 0..23
  Weather weather = Weather::Normal;
  int ttl_s = 60;

  bool operator==(const RequestRecord&) const = default;
};

struct DeviceProfile {
  std::string name;
  DeviceClass device_class;
  std::vector<double> loss_choices;
  std::vector<int> delay_choices_ms;
  std::vector<int> duration_choices_s;  // TTLs
  std::vector<int> ue_category_choices;
  // Empty means: derive from the sampled delay budget (<=50ms -> {1,3},
  // <=150ms -> {6,7}, else {8,9}).
  std::vector<int> qci_choices;
  std::vector<SliceKind> expected_slices;
};

// The seven device rows the traffic model is built from.
const std::vector<DeviceProfile>& profile_table();

enum class ArrivalProcess { UniformRate = 0, Poisson = 1 };

struct TrafficMixConfig {
  double fraction_embb = 0.45;
  double fraction_mmtc = 0.20;
  double fraction_urllc = 0.35;
  std::uint64_t total_requests = 500000;
  double duration_hours = 20.0;
  ArrivalProcess arrival_process = ArrivalProcess::UniformRate;
  std::uint64_t seed = 1;
  int pinned_day_of_week = -1;  // -1: sample uniformly
  int pinned_weather = -1;      // -1: sample uniformly; 0 normal, 1 harsh

  std::int64_t duration_s() const {
    return static_cast<std::int64_t>(duration_hours * 3600.0 + 0.5);
  }
};

// Temporary arrival-rate multiplier for one slice class, used to construct
// overload conditions.
struct SurgeConfig {
  SliceKind slice = SliceKind::Mmtc;
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;
  double multiplier = 5.0;
};

// Deterministic synthetic request stream: per-request class drawn from the
// mix, then a compatible profile and KPI values sampled from its choice sets.
std::vector<RequestRecord> generate_stream(const TrafficMixConfig& config,
                                           const std::vector<DeviceProfile>& profiles);
std::vector<RequestRecord> generate_stream(const TrafficMixConfig& config,
                                           const std::vector<DeviceProfile>& profiles,
                                           const std::optional<SurgeConfig>& surge);

struct RowError {
  int line = 0;  // 1-based, header is line 1
  std::string message;
};

struct DatasetLoad {
  std::vector<RequestRecord> records;
  std::vector<RowError> errors;
};

// Columns, in order:
//   id,arrival_s,device_class,ue_category,qci,packet_loss_rate,
//   packet_delay_budget_ms,day_of_week,hour_of_day,weather,ttl_s
extern const char* const kDatasetHeader;

// Parses the dataset schema. A missing column raises ConfigError naming it;
// invalid rows are reported with line numbers and skipped.
DatasetLoad load_dataset(const std::string& path);
void write_dataset(const std::string& path, const std::vector<RequestRecord>& records);

struct EncodingBounds {
  int delay_min = 10, delay_max = 300;
  int ttl_min = 0, ttl_max = 600;
  int hour_min = 0, hour_max = 23;
  int ue_min = 1, ue_max = 8;

  bool operator==(const EncodingBounds&) const = default;
};

// Feature layout (32 dims):
//   [0]     delay budget, min-max normalized
//   [1]     TTL
//   [2]     hour of day
//   [3]     UE category
//   [4..10] device class one-hot (7)
//   [11..12] weather one-hot (2)
//   [13..19] day of week one-hot (7)
//   [20..28] QCI one-hot (9, values 1..9)
//   [29..31] loss level one-hot (1e-2, 1e-3, 1e-6)
constexpr int kFeatureDim = 32;

std::vector<double> encode_features(const RequestRecord& r,
                                    const EncodingBounds& bounds = {});

inline ServiceNeed classify_need(const RequestRecord& r) {
  return classify_need(r.packet_loss_rate, r.packet_delay_budget_ms);
}

}  // namespace sliceforge
