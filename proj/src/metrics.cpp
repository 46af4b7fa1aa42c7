#include "sliceforge/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sliceforge/csv.hpp"
#include "sliceforge/sim.hpp"

namespace sliceforge {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (std::uint64_t v : row) n += v;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  return counts[0][0] + counts[1][1] + counts[2][2];
}

std::uint64_t ConfusionMatrix::row_sum(int r) const {
  return counts[r][0] + counts[r][1] + counts[r][2];
}

std::uint64_t ConfusionMatrix::col_sum(int c) const {
  return counts[0][c] + counts[1][c] + counts[2][c];
}

ConfusionMatrix confusion(const std::vector<std::pair<SliceKind, SliceKind>>& pairs) {
  ConfusionMatrix m;
  for (const auto& [truth, predicted] : pairs) {
    if (truth == SliceKind::Master || predicted == SliceKind::Master)
      throw ConfigError("confusion matrix is over the three service slices");
    ++m.counts[static_cast<int>(truth)][static_cast<int>(predicted)];
  }
  return m;
}

MetricsReport metrics(const ConfusionMatrix& m) {
  const std::uint64_t total = m.total();
  if (total == 0) throw DataError("metrics over an empty confusion matrix");

  MetricsReport r;
  r.accuracy_pct = 100.0 * static_cast<double>(m.trace()) / static_cast<double>(total);

  double psum = 0.0, rsum = 0.0, fsum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto diag = static_cast<double>(m.counts[c][c]);
    const std::uint64_t col = m.col_sum(c);
    const std::uint64_t row = m.row_sum(c);
    r.support[c] = row;

    double precision = 0.0;
    if (col == 0)
      r.warnings.push_back(std::string("class ") + to_string(static_cast<SliceKind>(c)) +
                           " never predicted; precision set to 0");
    else
      precision = diag / static_cast<double>(col);

    double recall = 0.0;
    if (row == 0)
      r.warnings.push_back(std::string("class ") + to_string(static_cast<SliceKind>(c)) +
                           " absent from the truth; recall set to 0");
    else
      recall = diag / static_cast<double>(row);

    const double f =
        (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);

    r.precision_pct[c] = 100.0 * precision;
    r.recall_pct[c] = 100.0 * recall;
    r.f_pct[c] = 100.0 * f;
    psum += precision;
    rsum += recall;
    fsum += f;
  }
  r.macro_precision_pct = 100.0 * psum / 3.0;
  r.macro_recall_pct = 100.0 * rsum / 3.0;
  r.macro_f_pct = 100.0 * fsum / 3.0;

  // Single-label micro averages: TP totals equal the trace, FP and FN totals
  // both equal total - trace.
  const double micro = static_cast<double>(m.trace()) / static_cast<double>(total);
  r.micro_precision_pct = 100.0 * micro;
  r.micro_recall_pct = 100.0 * micro;
  r.micro_f_pct = 100.0 * micro;
  return r;
}

namespace {

std::string two_dec(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string format_report(const MetricsReport& r, bool show_micro) {
  std::ostringstream os;
  os << "overall (%): accuracy " << two_dec(r.accuracy_pct) << "  recall "
     << two_dec(r.macro_recall_pct) << "  precision " << two_dec(r.macro_precision_pct)
     << "  f-score " << two_dec(r.macro_f_pct) << "\n";
  for (int c = 0; c < 3; ++c) {
    os << "  " << to_string(static_cast<SliceKind>(c)) << ": precision "
       << two_dec(r.precision_pct[c]) << "  recall " << two_dec(r.recall_pct[c])
       << "  f " << two_dec(r.f_pct[c]) << "  support " << r.support[c] << "\n";
  }
  if (show_micro) {
    os << "micro (%): precision " << two_dec(r.micro_precision_pct) << "  recall "
       << two_dec(r.micro_recall_pct) << "  f " << two_dec(r.micro_f_pct) << "\n";
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string format_confusion(const ConfusionMatrix& m) {
  std::ostringstream os;
  os << "confusion (rows = true, cols = predicted):\n";
  os << "          embb     mmtc    urllc\n";
  for (int r = 0; r < 3; ++r) {
    char line[96];
    std::snprintf(line, sizeof line, "%8s %8llu %8llu %8llu\n",
                  to_string(static_cast<SliceKind>(r)),
                  static_cast<unsigned long long>(m.counts[r][0]),
                  static_cast<unsigned long long>(m.counts[r][1]),
                  static_cast<unsigned long long>(m.counts[r][2]));
    os << line;
  }
  return os.str();
}

void export_series(const std::vector<SampleRow>& samples, SeriesKind kind,
                   const std::string& path, double skip_warmup_hours) {
  if (samples.empty()) throw DataError("no samples to export");

  const auto cutoff = static_cast<std::int64_t>(skip_warmup_hours * 3600.0);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open file for writing: " + path);

  switch (kind) {
    case SeriesKind::ActiveUsers:
      out << "time_s,embb,mmtc,urllc,master\n";
      break;
    case SeriesKind::Utilization:
      out << "time_s,embb,mmtc,urllc,master\n";
      break;
    case SeriesKind::Counters:
      out << "time_s,admitted,overflow_redirected,failure_redirected,"
             "unmatched_fallback,dropped,rejected\n";
      break;
  }

  for (const auto& row : samples) {
    if (row.time_s < cutoff) continue;
    out << row.time_s;
    switch (kind) {
      case SeriesKind::ActiveUsers:
        for (int s = 0; s < 4; ++s) out << ',' << row.active[s];
        break;
      case SeriesKind::Utilization:
        for (int s = 0; s < 4; ++s) out << ',' << csv::format_double(row.utilization_pct[s]);
        break;
      case SeriesKind::Counters:
        out << ',' << row.admitted << ',' << row.overflow_redirected << ','
            << row.failure_redirected << ',' << row.unmatched_fallback << ','
            << row.dropped << ',' << row.rejected;
        break;
    }
    out << '\n';
  }
}

}  // namespace sliceforge
