#pragma once

#include <cstdint>
#include <vector>

#include "sliceforge/errors.hpp"

namespace sliceforge {

struct ForecasterConfig {
  int hidden_size = 16;
  int window = 12;  // unroll length; 2 hours at 10-minute sampling
};

struct ForecastTrainConfig {
  int epochs = 30;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
};

// Single gated recurrent cell (input/forget/output gates plus a tanh
// candidate) over a scalar utilization series, with a linear readout that
// predicts the next sample. Trained by truncated backpropagation through time
// over sliding windows.
class Forecaster {
 public:
  Forecaster(ForecasterConfig cfg, std::uint64_t seed);

  int window() const { return cfg_.window; }
  int hidden_size() const { return cfg_.hidden_size; }

  // Consumes a window of utilization percentages and returns the predicted
  // utilization for the next sample, clamped to [0, 100].
  double forecast_next_pct(const std::vector<double>& window_pct) const;

  struct TrainResult {
    std::vector<double> epoch_loss;  // mean squared error per epoch
  };
  // trace is a utilization-percentage series; needs length >= 2 * window.
  TrainResult train(const std::vector<double>& trace_pct,
                    const ForecastTrainConfig& tc);

  // Flat parameter access (gate weights, gate recurrences, gate biases,
  // readout), used by the gradient check.
  std::size_t param_count() const;
  double get_param(std::size_t i) const;
  void set_param(std::size_t i, double v);
  double get_grad(std::size_t i) const;
  void zero_grads();

  // Mean per-step squared error of the raw readout over one window.
  // inputs and targets are fractions (pct / 100).
  double window_loss(const std::vector<double>& inputs,
                     const std::vector<double>& targets) const;
  void accumulate_gradients(const std::vector<double>& inputs,
                            const std::vector<double>& targets);
  void sgd_step(double lr);

 private:
  struct Gate {
    std::vector<double> wx, wh, b;    // wx: H, wh: H x H, b: H
    std::vector<double> gwx, gwh, gb;
  };

  struct Trace;  // per-step caches for backprop

  void forward(const std::vector<double>& inputs, Trace& tr) const;

  ForecasterConfig cfg_;
  Gate in_, forget_, out_, cand_;
  std::vector<double> wy_, gwy_;
  double by_ = 0.0, gby_ = 0.0;
};

// Maximum relative error between analytic and central finite-difference
// gradients through the unrolled window.
double grad_check(Forecaster& model, const std::vector<double>& inputs,
                  const std::vector<double>& targets, double epsilon = 1e-5);

}  // namespace sliceforge
