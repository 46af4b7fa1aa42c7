#include "sliceforge/forecaster.hpp"

#include <algorithm>
#include <cmath>

#include "sliceforge/rng.hpp"

namespace sliceforge {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

struct Forecaster::Trace {
  // Per step: gate activations, cell and hidden states, readout.
  std::vector<std::vector<double>> i, f, o, g, c, h, tanh_c;
  std::vector<double> y;
};

Forecaster::Forecaster(ForecasterConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.hidden_size <= 0 || cfg_.window <= 0)
    throw ConfigError("forecaster hidden size and window must be positive");

  Rng rng(seed);
  const int h = cfg_.hidden_size;
  auto init_gate = [&](Gate& gate) {
    const double rx = std::sqrt(6.0 / (1.0 + h));
    const double rh = std::sqrt(6.0 / (2.0 * h));
    gate.wx.resize(h);
    for (auto& v : gate.wx) v = rng.uniform(-rx, rx);
    gate.wh.resize(static_cast<std::size_t>(h) * h);
    for (auto& v : gate.wh) v = rng.uniform(-rh, rh);
    gate.b.assign(h, 0.0);
    gate.gwx.assign(h, 0.0);
    gate.gwh.assign(gate.wh.size(), 0.0);
    gate.gb.assign(h, 0.0);
  };
  init_gate(in_);
  init_gate(forget_);
  init_gate(out_);
  init_gate(cand_);

  const double ry = std::sqrt(6.0 / (1.0 + h));
  wy_.resize(h);
  for (auto& v : wy_) v = rng.uniform(-ry, ry);
  gwy_.assign(h, 0.0);
}

void Forecaster::forward(const std::vector<double>& inputs, Trace& tr) const {
  const int hs = cfg_.hidden_size;
  const std::size_t steps = inputs.size();
  tr.i.assign(steps, {});
  tr.f.assign(steps, {});
  tr.o.assign(steps, {});
  tr.g.assign(steps, {});
  tr.c.assign(steps, {});
  tr.h.assign(steps, {});
  tr.tanh_c.assign(steps, {});
  tr.y.assign(steps, 0.0);

  std::vector<double> h_prev(hs, 0.0), c_prev(hs, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double x = inputs[t];
    auto gate_pre = [&](const Gate& gate, int j) {
      double s = gate.wx[j] * x + gate.b[j];
      const double* row = &gate.wh[static_cast<std::size_t>(j) * hs];
      for (int k = 0; k < hs; ++k) s += row[k] * h_prev[k];
      return s;
    };
    std::vector<double> iv(hs), fv(hs), ov(hs), gv(hs), cv(hs), hv(hs), tc(hs);
    for (int j = 0; j < hs; ++j) {
      iv[j] = sigmoid(gate_pre(in_, j));
      fv[j] = sigmoid(gate_pre(forget_, j));
      ov[j] = sigmoid(gate_pre(out_, j));
      gv[j] = std::tanh(gate_pre(cand_, j));
      cv[j] = fv[j] * c_prev[j] + iv[j] * gv[j];
      tc[j] = std::tanh(cv[j]);
      hv[j] = ov[j] * tc[j];
    }
    double y = by_;
    for (int j = 0; j < hs; ++j) y += wy_[j] * hv[j];
    tr.i[t] = std::move(iv);
    tr.f[t] = std::move(fv);
    tr.o[t] = std::move(ov);
    tr.g[t] = std::move(gv);
    tr.c[t] = std::move(cv);
    tr.h[t] = std::move(hv);
    tr.tanh_c[t] = std::move(tc);
    tr.y[t] = y;
    h_prev = tr.h[t];
    c_prev = tr.c[t];
  }
}

double Forecaster::window_loss(const std::vector<double>& inputs,
                               const std::vector<double>& targets) const {
  if (inputs.size() != targets.size() || inputs.empty())
    throw CompatError("inputs and targets must be equal-length and nonempty");
  Trace tr;
  forward(inputs, tr);
  double loss = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double d = tr.y[t] - targets[t];
    loss += d * d;
  }
  return loss / static_cast<double>(inputs.size());
}

void Forecaster::accumulate_gradients(const std::vector<double>& inputs,
                                      const std::vector<double>& targets) {
  if (inputs.size() != targets.size() || inputs.empty())
    throw CompatError("inputs and targets must be equal-length and nonempty");
  const int hs = cfg_.hidden_size;
  const std::size_t steps = inputs.size();
  Trace tr;
  forward(inputs, tr);

  std::vector<double> dh_next(hs, 0.0), dc_next(hs, 0.0);
  const std::vector<double> zeros(hs, 0.0);
  const double inv_n = 1.0 / static_cast<double>(steps);

  for (std::size_t t = steps; t-- > 0;) {
    const double dy = 2.0 * (tr.y[t] - targets[t]) * inv_n;
    gby_ += dy;
    std::vector<double> dh(hs, 0.0);
    for (int j = 0; j < hs; ++j) {
      gwy_[j] += dy * tr.h[t][j];
      dh[j] = dy * wy_[j] + dh_next[j];
    }

    const std::vector<double>& c_prev = t > 0 ? tr.c[t - 1] : zeros;
    const std::vector<double>& h_prev = t > 0 ? tr.h[t - 1] : zeros;

    std::vector<double> da_i(hs), da_f(hs), da_o(hs), da_g(hs), dc(hs);
    for (int j = 0; j < hs; ++j) {
      const double tc = tr.tanh_c[t][j];
      dc[j] = dh[j] * tr.o[t][j] * (1.0 - tc * tc) + dc_next[j];
      const double o = tr.o[t][j];
      da_o[j] = dh[j] * tc * o * (1.0 - o);
      const double i = tr.i[t][j];
      da_i[j] = dc[j] * tr.g[t][j] * i * (1.0 - i);
      const double f = tr.f[t][j];
      da_f[j] = dc[j] * c_prev[j] * f * (1.0 - f);
      const double g = tr.g[t][j];
      da_g[j] = dc[j] * i * (1.0 - g * g);
    }

    const double x = inputs[t];
    auto add_gate = [&](Gate& gate, const std::vector<double>& da) {
      for (int j = 0; j < hs; ++j) {
        gate.gwx[j] += da[j] * x;
        gate.gb[j] += da[j];
        double* row = &gate.gwh[static_cast<std::size_t>(j) * hs];
        for (int k = 0; k < hs; ++k) row[k] += da[j] * h_prev[k];
      }
    };
    add_gate(in_, da_i);
    add_gate(forget_, da_f);
    add_gate(out_, da_o);
    add_gate(cand_, da_g);

    std::vector<double> dh_prev(hs, 0.0);
    auto add_dh_prev = [&](const Gate& gate, const std::vector<double>& da) {
      for (int j = 0; j < hs; ++j) {
        const double* row = &gate.wh[static_cast<std::size_t>(j) * hs];
        for (int k = 0; k < hs; ++k) dh_prev[k] += row[k] * da[j];
      }
    };
    add_dh_prev(in_, da_i);
    add_dh_prev(forget_, da_f);
    add_dh_prev(out_, da_o);
    add_dh_prev(cand_, da_g);

    dh_next = std::move(dh_prev);
    for (int j = 0; j < hs; ++j) dc_next[j] = dc[j] * tr.f[t][j];
  }
}

void Forecaster::sgd_step(double lr) {
  auto step_gate = [&](Gate& gate) {
    for (std::size_t i = 0; i < gate.wx.size(); ++i) gate.wx[i] -= lr * gate.gwx[i];
    for (std::size_t i = 0; i < gate.wh.size(); ++i) gate.wh[i] -= lr * gate.gwh[i];
    for (std::size_t i = 0; i < gate.b.size(); ++i) gate.b[i] -= lr * gate.gb[i];
  };
  step_gate(in_);
  step_gate(forget_);
  step_gate(out_);
  step_gate(cand_);
  for (std::size_t i = 0; i < wy_.size(); ++i) wy_[i] -= lr * gwy_[i];
  by_ -= lr * gby_;
}

void Forecaster::zero_grads() {
  auto zero_gate = [](Gate& gate) {
    std::fill(gate.gwx.begin(), gate.gwx.end(), 0.0);
    std::fill(gate.gwh.begin(), gate.gwh.end(), 0.0);
    std::fill(gate.gb.begin(), gate.gb.end(), 0.0);
  };
  zero_gate(in_);
  zero_gate(forget_);
  zero_gate(out_);
  zero_gate(cand_);
  std::fill(gwy_.begin(), gwy_.end(), 0.0);
  gby_ = 0.0;
}

std::size_t Forecaster::param_count() const {
  const std::size_t per_gate = in_.wx.size() + in_.wh.size() + in_.b.size();
  return 4 * per_gate + wy_.size() + 1;
}

namespace {

double* flat_locate(std::size_t i, std::vector<std::vector<double>*> blocks,
                    double* scalar) {
  for (auto* block : blocks) {
    if (i < block->size()) return &(*block)[i];
    i -= block->size();
  }
  if (i == 0) return scalar;
  throw CompatError("parameter index out of range");
}

}  // namespace

double Forecaster::get_param(std::size_t i) const {
  auto* self = const_cast<Forecaster*>(this);
  return *flat_locate(i,
                      {&self->in_.wx, &self->in_.wh, &self->in_.b, &self->forget_.wx,
                       &self->forget_.wh, &self->forget_.b, &self->out_.wx,
                       &self->out_.wh, &self->out_.b, &self->cand_.wx, &self->cand_.wh,
                       &self->cand_.b, &self->wy_},
                      &self->by_);
}

void Forecaster::set_param(std::size_t i, double v) {
  *flat_locate(i,
               {&in_.wx, &in_.wh, &in_.b, &forget_.wx, &forget_.wh, &forget_.b,
                &out_.wx, &out_.wh, &out_.b, &cand_.wx, &cand_.wh, &cand_.b, &wy_},
               &by_) = v;
}

double Forecaster::get_grad(std::size_t i) const {
  auto* self = const_cast<Forecaster*>(this);
  return *flat_locate(
      i,
      {&self->in_.gwx, &self->in_.gwh, &self->in_.gb, &self->forget_.gwx,
       &self->forget_.gwh, &self->forget_.gb, &self->out_.gwx, &self->out_.gwh,
       &self->out_.gb, &self->cand_.gwx, &self->cand_.gwh, &self->cand_.gb,
       &self->gwy_},
      &self->gby_);
}

double Forecaster::forecast_next_pct(const std::vector<double>& window_pct) const {
  if (static_cast<int>(window_pct.size()) != cfg_.window)
    throw CompatError("window length " + std::to_string(window_pct.size()) +
                      " does not match the model's unroll window " +
                      std::to_string(cfg_.window));
  std::vector<double> inputs(window_pct.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i] = window_pct[i] / 100.0;
  Trace tr;
  forward(inputs, tr);
  return std::clamp(tr.y.back() * 100.0, 0.0, 100.0);
}

Forecaster::TrainResult Forecaster::train(const std::vector<double>& trace_pct,
                                          const ForecastTrainConfig& tc) {
  const int w = cfg_.window;
  if (static_cast<int>(trace_pct.size()) < 2 * w)
    throw DataError("trace too short: need at least " + std::to_string(2 * w) +
                    " samples, got " + std::to_string(trace_pct.size()));
  if (tc.epochs <= 0 || tc.learning_rate <= 0.0)
    throw ConfigError("epochs and learning rate must be positive");

  std::vector<double> series(trace_pct.size());
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = trace_pct[i] / 100.0;

  // Sliding windows: inputs series[s .. s+w-1], per-step targets shifted by 1.
  const std::size_t window_count = series.size() - static_cast<std::size_t>(w);
  std::vector<std::size_t> starts(window_count);
  for (std::size_t s = 0; s < window_count; ++s) starts[s] = s;

  Rng rng(derive_seed(tc.seed, 29));
  TrainResult result;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    rng.shuffle(starts);
    double loss_sum = 0.0;
    for (std::size_t s : starts) {
      std::vector<double> inputs(series.begin() + s, series.begin() + s + w);
      std::vector<double> targets(series.begin() + s + 1, series.begin() + s + 1 + w);
      loss_sum += window_loss(inputs, targets);
      zero_grads();
      accumulate_gradients(inputs, targets);
      sgd_step(tc.learning_rate);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(window_count));
  }
  return result;
}

double grad_check(Forecaster& model, const std::vector<double>& inputs,
                  const std::vector<double>& targets, double epsilon) {
  model.zero_grads();
  model.accumulate_gradients(inputs, targets);
  const double base = model.window_loss(inputs, targets);
  if (!std::isfinite(base)) throw DataError("loss is not finite");

  double max_rel = 0.0;
  for (std::size_t p = 0; p < model.param_count(); ++p) {
    const double analytic = model.get_grad(p);
    const double orig = model.get_param(p);
    model.set_param(p, orig + epsilon);
    const double lp = model.window_loss(inputs, targets);
    model.set_param(p, orig - epsilon);
    const double lm = model.window_loss(inputs, targets);
    model.set_param(p, orig);
    const double fd = (lp - lm) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic - fd) / denom);
  }
  return max_rel;
}

}  // namespace sliceforge
