#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sliceforge/forecaster.hpp"
#include "sliceforge/predictor.hpp"
#include "sliceforge/slicing.hpp"
#include "sliceforge/traffic.hpp"

namespace sliceforge {

struct FailureEvent {
  SliceKind slice = SliceKind::Mmtc;  // never Master
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;  // window is [start, end)
};

enum class PredictorMode { Oracle = 0, TrainedModel = 1 };

struct Scenario {
  std::string name;
  TrafficMixConfig traffic;
  NetworkConfig network;
  std::vector<FailureEvent> failures;
  std::int64_t sample_interval_s = 600;
  PredictorMode predictor_mode = PredictorMode::Oracle;
  std::string checkpoint_path;  // when predictor_mode == TrainedModel
  std::optional<SurgeConfig> surge;
};

// One row per full sample interval, stamped at the interval start. State is
// observed after every event at that timestamp except later samples, so the
// row at time t reflects arrivals at t.
struct SampleRow {
  std::int64_t time_s = 0;
  std::array<int, 4> active = {};
  std::array<double, 4> utilization_pct = {};
  std::array<bool, 4> healthy = {true, true, true, true};
  std::uint64_t admitted = 0;
  std::uint64_t overflow_redirected = 0;
  std::uint64_t failure_redirected = 0;
  std::uint64_t unmatched_fallback = 0;
  std::uint64_t rejected = 0;
  std::uint64_t dropped = 0;
};

struct Totals {
  std::uint64_t arrivals = 0;
  std::uint64_t admitted = 0;
  std::uint64_t overflow_redirected = 0;
  std::uint64_t failure_redirected = 0;
  std::uint64_t unmatched_fallback = 0;
  std::uint64_t rejected = 0;
  std::uint64_t dropped = 0;
  std::uint64_t rehomed = 0;
  std::uint64_t released = 0;
  std::uint64_t still_active = 0;
};

struct SimulationResult {
  std::vector<SampleRow> samples;
  std::vector<AdmissionDecision> decisions;
  Totals totals;
  // (oracle label, predicted slice) per arrival, model mode only.
  std::vector<std::pair<SliceKind, SliceKind>> eval_pairs;
};

// Runs the scenario: strict time order with the tie-break
// expiry < failure transition < arrival < sample, bit-reproducible given the
// scenario. Throws ConfigError before any event runs if the scenario is
// invalid; loads the checkpoint itself in TrainedModel mode.
SimulationResult run(const Scenario& scenario);
SimulationResult run(const Scenario& scenario, const SlicePredictor* model);

std::vector<std::string> preset_names();
// ConfigError for unknown names; the message lists the presets.
Scenario preset_scenario(const std::string& name);
// Accepts a preset name or a scenario JSON file path.
Scenario resolve_scenario(const std::string& name_or_path);
Scenario load_scenario_file(const std::string& path);

// Multiplies total_requests by scale (for reduced-scale runs).
void apply_scale(Scenario& s, double scale);

// Result files.
void write_samples_csv(const std::string& path, const std::vector<SampleRow>& rows);
std::vector<SampleRow> read_samples_csv(const std::string& path);
void write_decisions_csv(const std::string& path,
                         const std::vector<AdmissionDecision>& decisions);
std::vector<AdmissionDecision> read_decisions_csv(const std::string& path);
void write_totals_json(const std::string& path, const Totals& totals);
void write_pairs_csv(const std::string& path,
                     const std::vector<std::pair<SliceKind, SliceKind>>& pairs);
// ConfigError with the line number on unknown class tokens.
std::vector<std::pair<SliceKind, SliceKind>> read_pairs_csv(const std::string& path);

// Advisory pre-overload warnings: slides the forecaster over one slice's
// utilization series and flags samples whose predicted utilization crosses
// the threshold. Never affects admission decisions.
struct OverloadWarning {
  std::int64_t time_s = 0;
  SliceKind slice = SliceKind::Embb;
  double predicted_util_pct = 0.0;
};

std::vector<OverloadWarning> overload_warnings(const std::vector<SampleRow>& samples,
                                               SliceKind slice,
                                               const Forecaster& forecaster,
                                               int threshold_pct);

}  // namespace sliceforge
