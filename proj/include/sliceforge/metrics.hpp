#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sliceforge/slicing.hpp"

namespace sliceforge {

struct SampleRow;  // sim.hpp

// 3x3 counts over the service slices, rows = true class, columns = predicted.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 3>, 3> counts = {};

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(int r) const;
  std::uint64_t col_sum(int c) const;
};

ConfusionMatrix confusion(const std::vector<std::pair<SliceKind, SliceKind>>& pairs);

struct MetricsReport {
  double accuracy_pct = 0.0;
  double macro_precision_pct = 0.0;
  double macro_recall_pct = 0.0;
  double macro_f_pct = 0.0;
  std::array<double, 3> precision_pct = {};
  std::array<double, 3> recall_pct = {};
  std::array<double, 3> f_pct = {};
  std::array<std::uint64_t, 3> support = {};
  // Micro averages (for a single-label task these coincide with accuracy).
  double micro_precision_pct = 0.0;
  double micro_recall_pct = 0.0;
  double micro_f_pct = 0.0;
  std::vector<std::string> warnings;  // zero-denominator classes
};

// Standard definitions: precision = diag/col, recall = diag/row (0 with a
// warning when the denominator is 0), F = 2PR/(P+R), macro = unweighted mean.
// Throws DataError on an empty matrix.
MetricsReport metrics(const ConfusionMatrix& m);

// Two-decimal human-readable table plus the confusion matrix.
std::string format_report(const MetricsReport& r, bool show_micro = false);
std::string format_confusion(const ConfusionMatrix& m);

enum class SeriesKind { ActiveUsers, Utilization, Counters };

// Writes a per-slice time series as CSV (time column plus one column per
// slice; Counters writes the cumulative counter columns instead). Rows with
// time < skip_warmup_hours are omitted. Throws DataError on an empty sample
// list and ConfigError on an unwritable path; no file is created on error.
void export_series(const std::vector<SampleRow>& samples, SeriesKind kind,
                   const std::string& path, double skip_warmup_hours = 0.0);

}  // namespace sliceforge
