// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for all criteria, or with a criterion number (1..9) for a single one.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "replay_oracle.hpp"
#include "sliceforge/metrics.hpp"
#include "sliceforge/predictor.hpp"
#include "sliceforge/rng.hpp"
#include "sliceforge/sim.hpp"

using namespace sliceforge;
namespace sft = sliceforge::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// criterion 1: admission equals an independently written rule-ladder reference
// ---------------------------------------------------------------------------

struct RefDecision {
  SliceKind assigned;
  AdmitReason reason;
};

// Direct transcription of the admission branch ladder: a working slice takes
// its class while at or under 92% utilization, everything else lands on the
// master slice (overflow, failure, or no matching class), which rejects only
// when full. Kept deliberately separate from NetworkState::admit.
RefDecision reference_admit(ServiceNeed need, int target_active, int target_capacity,
                            bool target_healthy, int threshold_pct, int master_active,
                            int master_capacity) {
  auto under = [&](int active, int capacity) {
    return active * 100 <= threshold_pct * capacity && active < capacity;
  };
  auto to_master = [&](AdmitReason why) {
    if (master_active >= master_capacity)
      return RefDecision{SliceKind::Master, AdmitReason::RejectedNoCapacity};
    return RefDecision{SliceKind::Master, why};
  };

  if (need == ServiceNeed::Unmatched) return to_master(AdmitReason::UnmatchedFallback);
  if (!target_healthy) return to_master(AdmitReason::FailureRedirect);
  if (need == ServiceNeed::HighThroughput && under(target_active, target_capacity))
    return {SliceKind::Embb, AdmitReason::PrimaryFit};
  if (need == ServiceNeed::ReliableLowLatency && under(target_active, target_capacity))
    return {SliceKind::Urllc, AdmitReason::PrimaryFit};
  if (need == ServiceNeed::LowThroughputHighDensity &&
      under(target_active, target_capacity))
    return {SliceKind::Mmtc, AdmitReason::PrimaryFit};
  return to_master(AdmitReason::OverflowRedirect);
}

Check criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  Check c;

  const double losses[] = {1e-2, 1e-3, 1e-6};
  const int delays[] = {10, 15, 50, 60, 75, 100, 110, 130, 150, 180, 300};
  const int utils[] = {0, 45, 46, 47, 50};
  int cases = 0, mismatches = 0;

  for (double loss : losses) {
    for (int delay : delays) {
      const ServiceNeed need = classify_need(loss, delay);
      const SliceKind target = primary_slice_for(need);
      for (int u : utils) {
        for (int health = 0; health < 2; ++health) {
          const bool healthy = health == 0;
          if (target == SliceKind::Master && !healthy) continue;

          NetworkConfig cfg;
          cfg.capacities = {50, 50, 50, 50};
          NetworkState net(cfg);
          for (int i = 0; i < u; ++i)
            net.slice(target).insert(1000 + static_cast<std::uint64_t>(i), 1 << 20);
          if (!healthy) net.set_health(target, false, 0);

          const int master_active =
              net.slice(SliceKind::Master).active_count();
          const auto got = net.admit(1, need, 10, 60);
          const auto want = reference_admit(need, u, 50, healthy, 92, master_active, 50);

          ++cases;
          if (got.reason != want.reason ||
              (got.reason != AdmitReason::RejectedNoCapacity &&
               got.assigned != want.assigned))
            ++mismatches;
        }
      }
    }
  }

  c.expect(mismatches == 0, std::to_string(mismatches) + " mismatches over " +
                                std::to_string(cases) + " cases");
  c.expect(seconds_since(start) < 10.0, "runtime exceeded 10 s");
  if (c.ok) c.detail = std::to_string(cases) + " grid cases, zero mismatches";
  return c;
}

// ---------------------------------------------------------------------------
// criterion 2: failure-window exclusion on the mmtc-outage preset, 1/10 scale
// ---------------------------------------------------------------------------

Check criterion_2() {
  const auto start = std::chrono::steady_clock::now();
  Check c;

  Scenario s = preset_scenario("mmtc-outage");
  apply_scale(s, 0.1);
  const auto result = run(s);
  c.expect(result.totals.arrivals == 50000, "expected 50000 arrivals");

  const auto& windows = s.failures;
  auto inside = [&](std::int64_t t) {
    for (const auto& w : windows)
      if (t >= w.start_s && t < w.end_s) return true;
    return false;
  };

  std::uint64_t window_arrivals = 0;
  for (const auto& d : result.decisions) {
    if (!inside(d.time_s)) continue;
    c.expect(d.assigned != SliceKind::Mmtc, "mmtc assignment inside an outage window");
    if (d.need == ServiceNeed::LowThroughputHighDensity) {
      ++window_arrivals;
      c.expect(d.reason == AdmitReason::FailureRedirect,
               "mmtc-class arrival in window not failure-redirected");
      c.expect(d.assigned == SliceKind::Master,
               "mmtc-class arrival in window not on master");
    }
  }
  c.expect(window_arrivals > 0, "no mmtc-class arrivals fell inside the windows");

  for (const auto& row : result.samples) {
    if (inside(row.time_s))
      c.expect(row.active[static_cast<int>(SliceKind::Mmtc)] == 0,
               "mmtc active count nonzero during an outage window");
  }

  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "runtime exceeded 30 s");
  if (c.ok)
    c.detail = std::to_string(window_arrivals) + " in-window arrivals redirected";
  return c;
}

// ---------------------------------------------------------------------------
// criterion 3: overload boundary on the mmtc-overload preset
// ---------------------------------------------------------------------------

Check criterion_3() {
  Check c;
  Scenario s = preset_scenario("mmtc-overload");
  const auto result = run(s);

  const int mmtc = static_cast<int>(SliceKind::Mmtc);
  const int cap = s.network.capacities[mmtc];
  const int threshold = s.network.overload_threshold_pct;

  bool found_first_over = false;
  for (const auto& d : result.decisions) {
    if (d.target != SliceKind::Mmtc) continue;
    const bool over = static_cast<std::int64_t>(d.target_active_before) * 100 >
                      static_cast<std::int64_t>(threshold) * cap;
    if (over) {
      c.expect(d.reason == AdmitReason::OverflowRedirect,
               "first over-threshold mmtc decision was not an overflow redirect");
      found_first_over = true;
      break;
    }
    c.expect(d.reason != AdmitReason::OverflowRedirect,
             "overflow redirect before the threshold was exceeded");
  }
  c.expect(found_first_over, "mmtc never exceeded the threshold in mmtc-overload");
  c.expect(result.totals.overflow_redirected > 0, "no overflow redirects occurred");

  // Utilization never exceeds the threshold by more than one connection.
  for (const auto& row : result.samples) {
    c.expect(static_cast<std::int64_t>(row.active[mmtc]) * 100 <=
                 static_cast<std::int64_t>(threshold) * cap + 100,
             "mmtc exceeded 92% plus one connection at a sample");
  }
  if (c.ok)
    c.detail = std::to_string(result.totals.overflow_redirected) +
               " overflow redirects, boundary held";
  return c;
}

// ---------------------------------------------------------------------------
// criterion 4: traffic mix at 500k requests
// ---------------------------------------------------------------------------

Check criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  Check c;

  TrafficMixConfig cfg;  // 500k, 45/20/35
  cfg.seed = 7;
  const auto stream = generate_stream(cfg, profile_table());
  c.expect(stream.size() == 500000, "wrong stream size");

  std::array<std::uint64_t, 3> counts = {0, 0, 0};
  for (const auto& r : stream) ++counts[static_cast<int>(oracle_label(r))];
  const double n = static_cast<double>(stream.size());
  const double de = std::abs(counts[0] / n - 0.45);
  const double dm = std::abs(counts[1] / n - 0.20);
  const double du = std::abs(counts[2] / n - 0.35);
  c.expect(de < 0.01, "embb fraction off by " + std::to_string(de));
  c.expect(dm < 0.01, "mmtc fraction off by " + std::to_string(dm));
  c.expect(du < 0.01, "urllc fraction off by " + std::to_string(du));
  c.expect(seconds_since(start) < 10.0, "runtime exceeded 10 s");

  if (c.ok) {
    std::ostringstream os;
    os << "fractions " << counts[0] / n << " / " << counts[1] / n << " / "
       << counts[2] / n;
    c.detail = os.str();
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 5: gradient correctness over 100 random (model, batch) trials
// ---------------------------------------------------------------------------

Check criterion_5() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  Rng rng(2024);
  double worst = 0.0;

  // 60 classifier trials (some with the conv front), 40 recurrent trials.
  for (int trial = 0; trial < 60; ++trial) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      MlpConfig mc;
      mc.input_dim = 4 + static_cast<int>(rng.below(6));
      const int depth = 1 + static_cast<int>(rng.below(3));
      for (int l = 0; l < depth; ++l)
        mc.hidden.push_back(3 + static_cast<int>(rng.below(4)));
      mc.output_dim = 2 + static_cast<int>(rng.below(3));
      if (trial % 4 == 0) mc.conv_front = Conv1dSpec{2, 3};

      Mlp net(mc, rng.next_u64());
      const int batch = 2 + static_cast<int>(rng.below(3));
      std::vector<std::vector<double>> xs;
      std::vector<int> ys;
      double min_pre = std::numeric_limits<double>::infinity();
      for (int b = 0; b < batch; ++b) {
        std::vector<double> x(mc.input_dim);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        min_pre = std::min(min_pre, net.min_abs_preactivation(x));
        xs.push_back(std::move(x));
        ys.push_back(static_cast<int>(rng.below(mc.output_dim)));
      }
      // Finite differences are only meaningful away from ReLU kinks.
      if (min_pre < 1e-3) continue;
      worst = std::max(worst, grad_check(net, xs, ys, 1e-5));
      break;
    }
  }

  for (int trial = 0; trial < 40; ++trial) {
    const int hidden = 2 + static_cast<int>(rng.below(5));
    const int window = 3 + static_cast<int>(rng.below(4));
    Forecaster model(ForecasterConfig{hidden, window}, rng.next_u64());
    std::vector<double> inputs(window), targets(window);
    for (auto& v : inputs) v = rng.uniform(0.0, 1.0);
    for (auto& v : targets) v = rng.uniform(0.0, 1.0);
    worst = std::max(worst, grad_check(model, inputs, targets, 1e-5));
  }

  c.expect(worst < 1e-4,
           "max relative gradient error " + std::to_string(worst));
  c.expect(seconds_since(start) < 60.0, "runtime exceeded 60 s");
  if (c.ok) {
    std::ostringstream os;
    os << "100 trials, max relative error " << worst;
    c.detail = os.str();
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 6: classifier accuracy on oracle labels, clean and noisy
// ---------------------------------------------------------------------------

Check criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  Check c;

  TrafficMixConfig tcfg;
  tcfg.total_requests = 10000;
  tcfg.duration_hours = 4.0;
  tcfg.seed = 31;
  const auto records = generate_stream(tcfg, profile_table());

  std::vector<SliceKind> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(oracle_label(r));

  PredictorTrainConfig pcfg;  // defaults: 65/35 split, 30 epochs
  pcfg.seed = 5;
  const auto clean = train_predictor(records, labels, pcfg);
  const double clean_acc = accuracy_on(clean.model, records, labels, clean.heldout_indices);
  c.expect(clean_acc >= 0.99,
           "clean held-out accuracy " + std::to_string(clean_acc) + " < 0.99");

  // 5% label noise: flip to one of the other two classes.
  std::vector<SliceKind> noisy = labels;
  Rng noise(77);
  std::size_t flipped = 0;
  for (auto& l : noisy) {
    if (noise.next_real() < 0.05) {
      l = static_cast<SliceKind>((static_cast<int>(l) + 1 +
                                  static_cast<int>(noise.below(2))) % 3);
      ++flipped;
    }
  }
  const auto noisy_out = train_predictor(records, noisy, pcfg);
  const double noisy_acc =
      accuracy_on(noisy_out.model, records, noisy, noisy_out.heldout_indices);
  c.expect(noisy_acc >= 0.93,
           "noisy held-out accuracy " + std::to_string(noisy_acc) + " < 0.93");
  c.expect(seconds_since(start) < 300.0, "runtime exceeded 5 min");

  if (c.ok) {
    std::ostringstream os;
    os << "clean " << clean_acc << ", with 5% noise (" << flipped << " flips) "
       << noisy_acc;
    c.detail = os.str();
  }
  return c;
}

// ---------------------------------------------------------------------------
// criterion 7: metrics against the hand fixture and the matrix-free oracle
// ---------------------------------------------------------------------------

Check criterion_7() {
  Check c;
  auto close = [](double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / denom <= 1e-12;
  };

  ConfusionMatrix fixture;
  fixture.counts = {{{8, 1, 1}, {0, 9, 1}, {1, 0, 9}}};
  const auto r = metrics(fixture);
  c.expect(close(r.accuracy_pct, 100.0 * 26.0 / 30.0), "fixture accuracy");
  c.expect(close(r.precision_pct[0], 100.0 * 8.0 / 9.0), "fixture precision embb");
  c.expect(close(r.precision_pct[2], 100.0 * 9.0 / 11.0), "fixture precision urllc");
  c.expect(close(r.recall_pct[0], 100.0 * 8.0 / 10.0), "fixture recall embb");
  c.expect(close(r.f_pct[0], 100.0 * 16.0 / 19.0), "fixture f embb");
  c.expect(close(r.f_pct[2], 100.0 * 6.0 / 7.0), "fixture f urllc");
  c.expect(close(r.macro_precision_pct,
                 100.0 * (8.0 / 9.0 + 9.0 / 10.0 + 9.0 / 11.0) / 3.0),
           "fixture macro precision");
  c.expect(close(r.macro_f_pct, 100.0 * (16.0 / 19.0 + 9.0 / 10.0 + 6.0 / 7.0) / 3.0),
           "fixture macro f");

  Rng rng(99);
  for (int trial = 0; trial < 1000 && c.ok; ++trial) {
    std::vector<std::pair<SliceKind, SliceKind>> pairs;
    const int n = 1 + static_cast<int>(rng.below(200));
    for (int i = 0; i < n; ++i)
      pairs.emplace_back(static_cast<SliceKind>(rng.below(3)),
                         static_cast<SliceKind>(rng.below(3)));
    const auto a = metrics(confusion(pairs));

    // Matrix-free brute force straight over the pair list.
    std::uint64_t correct = 0;
    double psum = 0, rsum = 0, fsum = 0;
    for (const auto& [t, p] : pairs)
      if (t == p) ++correct;
    for (int cls = 0; cls < 3; ++cls) {
      std::uint64_t tp = 0, fp = 0, fn = 0;
      for (const auto& [t, p] : pairs) {
        if (static_cast<int>(t) == cls && static_cast<int>(p) == cls) ++tp;
        if (static_cast<int>(t) != cls && static_cast<int>(p) == cls) ++fp;
        if (static_cast<int>(t) == cls && static_cast<int>(p) != cls) ++fn;
      }
      const double precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
      const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
      psum += precision;
      rsum += recall;
      fsum += precision + recall == 0.0
                  ? 0.0
                  : 2 * precision * recall / (precision + recall);
    }
    c.expect(close(a.accuracy_pct, 100.0 * double(correct) / n), "random accuracy");
    c.expect(close(a.macro_precision_pct, 100.0 * psum / 3), "random macro precision");
    c.expect(close(a.macro_recall_pct, 100.0 * rsum / 3), "random macro recall");
    c.expect(close(a.macro_f_pct, 100.0 * fsum / 3), "random macro f");
  }
  if (c.ok) c.detail = "fixture and 1000 random pair lists match to 1e-12";
  return c;
}

// ---------------------------------------------------------------------------
// criterion 8: byte-identical CLI reruns of baseline-20h at 1/10 scale
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<unreadable>";
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

Check criterion_8() {
  Check c;
  const auto dir = fs::temp_directory_path() / "sliceforge_acceptance";
  fs::create_directories(dir);
  const auto d1 = dir / "det_run1";
  const auto d2 = dir / "det_run2";
  fs::remove_all(d1);
  fs::remove_all(d2);

  const std::string base = std::string(SLICEFORGE_BIN) +
                           " simulate --scenario baseline-20h --seed 7 --scale 0.1"
                           " --out-dir ";
  const int rc1 = std::system((base + d1.string() + " > /dev/null").c_str());
  const int rc2 = std::system((base + d2.string() + " > /dev/null").c_str());
  c.expect(rc1 == 0 && rc2 == 0, "simulate runs failed");
  c.expect(slurp(d1 / "decisions.csv") == slurp(d2 / "decisions.csv"),
           "decision logs differ between runs");
  c.expect(slurp(d1 / "samples.csv") == slurp(d2 / "samples.csv"),
           "sample CSVs differ between runs");
  if (c.ok) c.detail = "decision logs and sample CSVs byte-identical";
  return c;
}

// ---------------------------------------------------------------------------
// criterion 9: conservation and sample reconciliation across the suite's runs
// ---------------------------------------------------------------------------

Check criterion_9() {
  Check c;

  struct Job {
    std::string preset;
    double scale;
  };
  const std::vector<Job> jobs = {{"baseline-20h", 0.1},
                                 {"mmtc-outage", 0.1},
                                 {"urllc-outage", 0.1},
                                 {"mmtc-overload", 1.0}};

  for (const auto& job : jobs) {
    Scenario s = preset_scenario(job.preset);
    s.traffic.seed = 7;
    apply_scale(s, job.scale);
    const auto result = run(s);
    const Totals& t = result.totals;

    c.expect(t.admitted + t.overflow_redirected + t.failure_redirected +
                     t.unmatched_fallback + t.rejected ==
                 t.arrivals,
             job.preset + ": decision counts do not partition the arrivals");
    c.expect(t.dropped <= t.admitted, job.preset + ": dropped exceeds admitted");

    Rng rng(404);
    std::vector<std::size_t> picked;
    for (int i = 0; i < 10; ++i) picked.push_back(rng.below(result.samples.size()));
    std::sort(picked.begin(), picked.end());
    std::vector<std::int64_t> times;
    for (std::size_t i : picked) times.push_back(result.samples[i].time_s);

    const auto oracle = sft::replay_active_counts(result.decisions, s.failures, times);
    for (std::size_t q = 0; q < picked.size(); ++q) {
      const auto& row = result.samples[picked[q]];
      for (int k = 0; k < 4; ++k)
        c.expect(row.active[k] == oracle[q][k],
                 job.preset + ": sample row disagrees with the decision-log replay");
    }
  }
  if (c.ok) c.detail = "4 scenario runs conserve and reconcile at 10 sampled rows each";
  return c;
}

struct Criterion {
  int number;
  const char* name;
  std::function<Check()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "admission equals the rule-ladder reference on the exhaustive grid",
       criterion_1},
      {2, "mmtc-outage windows exclude mmtc and redirect its class", criterion_2},
      {3, "mmtc-overload redirects exactly at the 92% boundary", criterion_3},
      {4, "500k-request mix lands within 1% of 45/20/35", criterion_4},
      {5, "analytic gradients match finite differences over 100 trials", criterion_5},
      {6, "predictor: >=99% clean, >=93% with 5% label noise", criterion_6},
      {7, "metrics match the hand fixture and the matrix-free recomputation",
       criterion_7},
      {8, "baseline-20h CLI reruns are byte-identical", criterion_8},
      {9, "conservation and decision-log reconciliation hold for every run",
       criterion_9},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  bool all_ok = true;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.number != only) continue;
    Check result;
    try {
      result = criterion.fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    all_ok = all_ok && result.ok;
    std::printf("[%s] criterion %d: %s%s%s\n", result.ok ? "PASS" : "FAIL",
                criterion.number, criterion.name,
                result.detail.empty() ? "" : " -- ", result.detail.c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
