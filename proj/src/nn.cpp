#include "sliceforge/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sliceforge/rng.hpp"

namespace sliceforge {

namespace {

double glorot_radius(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

Mlp::Mlp(MlpConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  if (cfg_.input_dim <= 0 || cfg_.output_dim <= 0)
    throw ConfigError("network dimensions must be positive");
  for (int h : cfg_.hidden)
    if (h <= 0) throw ConfigError("hidden widths must be positive");

  Rng rng(seed);
  int prev = cfg_.input_dim;
  std::size_t first_dense = 0;

  if (cfg_.conv_front) {
    if (cfg_.hidden.empty())
      throw ConfigError("conv front requires at least one hidden layer");
    Conv c;
    c.channels = cfg_.conv_front->channels;
    c.kernel = cfg_.conv_front->kernel;
    c.in_len = cfg_.input_dim;
    if (c.channels <= 0 || c.kernel <= 0 || c.kernel > c.in_len)
      throw ConfigError("conv spec incompatible with the input dimension");
    const double r = glorot_radius(c.kernel, c.channels);
    c.w.resize(static_cast<std::size_t>(c.channels) * c.kernel);
    for (auto& v : c.w) v = rng.uniform(-r, r);
    c.b.assign(c.channels, 0.0);
    c.gw.assign(c.w.size(), 0.0);
    c.gb.assign(c.b.size(), 0.0);
    prev = c.out_dim();
    conv_ = std::move(c);
    first_dense = 1;  // hidden[0] is realized by the conv layer
  }

  std::vector<int> sizes;
  for (std::size_t i = first_dense; i < cfg_.hidden.size(); ++i)
    sizes.push_back(cfg_.hidden[i]);
  sizes.push_back(cfg_.output_dim);

  for (int out : sizes) {
    Dense d;
    d.in = prev;
    d.out = out;
    const double r = glorot_radius(d.in, d.out);
    d.w.resize(static_cast<std::size_t>(d.in) * d.out);
    for (auto& v : d.w) v = rng.uniform(-r, r);
    d.b.assign(d.out, 0.0);
    d.gw.assign(d.w.size(), 0.0);
    d.gb.assign(d.b.size(), 0.0);
    dense_.push_back(std::move(d));
    prev = out;
  }
}

void Mlp::forward(const std::vector<double>& x, std::vector<std::vector<double>>& pre,
                  std::vector<std::vector<double>>& act) const {
  if (static_cast<int>(x.size()) != cfg_.input_dim)
    throw CompatError("feature vector dimension mismatch: got " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(cfg_.input_dim));
  pre.clear();
  act.clear();
  act.push_back(x);

  if (conv_) {
    const Conv& c = *conv_;
    std::vector<double> z(c.out_dim());
    for (int ch = 0; ch < c.channels; ++ch) {
      for (int i = 0; i < c.out_len(); ++i) {
        double s = c.b[ch];
        for (int k = 0; k < c.kernel; ++k)
          s += c.w[static_cast<std::size_t>(ch) * c.kernel + k] * x[i + k];
        z[static_cast<std::size_t>(ch) * c.out_len() + i] = s;
      }
    }
    pre.push_back(z);
    std::vector<double> a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
    act.push_back(std::move(a));
  }

  for (std::size_t l = 0; l < dense_.size(); ++l) {
    const Dense& d = dense_[l];
    const std::vector<double>& in = act.back();
    std::vector<double> z(d.out);
    for (int o = 0; o < d.out; ++o) {
      double s = d.b[o];
      const double* row = &d.w[static_cast<std::size_t>(o) * d.in];
      for (int i = 0; i < d.in; ++i) s += row[i] * in[i];
      z[o] = s;
    }
    pre.push_back(z);
    const bool is_output = (l + 1 == dense_.size());
    if (is_output) {
      act.push_back(std::move(z));  // linear output; softmax applied by callers
    } else {
      std::vector<double> a(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
      act.push_back(std::move(a));
    }
  }
}

std::vector<double> Mlp::softmax(const std::vector<double>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<double> Mlp::logits(const std::vector<double>& x) const {
  std::vector<std::vector<double>> pre, act;
  forward(x, pre, act);
  return act.back();
}

std::vector<double> Mlp::probs(const std::vector<double>& x) const {
  return softmax(logits(x));
}

double Mlp::batch_loss(const std::vector<std::vector<double>>& xs,
                       const std::vector<int>& labels) const {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<double> p = probs(xs[i]);
    total += -std::log(std::max(p[labels[i]], 1e-300));
  }
  return total / static_cast<double>(xs.size());
}

void Mlp::zero_grads() {
  if (conv_) {
    std::fill(conv_->gw.begin(), conv_->gw.end(), 0.0);
    std::fill(conv_->gb.begin(), conv_->gb.end(), 0.0);
  }
  for (auto& d : dense_) {
    std::fill(d.gw.begin(), d.gw.end(), 0.0);
    std::fill(d.gb.begin(), d.gb.end(), 0.0);
  }
}

double Mlp::accumulate_gradients(const std::vector<double>& x, int label) {
  if (label < 0 || label >= cfg_.output_dim) throw CompatError("label out of range");
  std::vector<std::vector<double>> pre, act;
  forward(x, pre, act);

  std::vector<double> p = softmax(act.back());
  const double loss = -std::log(std::max(p[label], 1e-300));

  // delta for the output pre-activation
  std::vector<double> delta = p;
  delta[label] -= 1.0;

  for (std::size_t li = dense_.size(); li-- > 0;) {
    Dense& d = dense_[li];
    // activation index feeding this layer: act has x, (conv), dense outputs...
    const std::size_t act_in = (conv_ ? 1 : 0) + li;
    const std::vector<double>& in = act[act_in];
    for (int o = 0; o < d.out; ++o) {
      d.gb[o] += delta[o];
      double* grow = &d.gw[static_cast<std::size_t>(o) * d.in];
      for (int i = 0; i < d.in; ++i) grow[i] += delta[o] * in[i];
    }
    if (li == 0 && !conv_) break;  // input layer has no gradient
    std::vector<double> din(d.in, 0.0);
    for (int o = 0; o < d.out; ++o) {
      const double* row = &d.w[static_cast<std::size_t>(o) * d.in];
      for (int i = 0; i < d.in; ++i) din[i] += row[i] * delta[o];
    }
    // through the ReLU of the previous layer (dense or conv)
    const std::vector<double>& prev_pre = pre[(conv_ ? 1 : 0) + li - 1];
    for (std::size_t i = 0; i < din.size(); ++i)
      if (prev_pre[i] <= 0.0) din[i] = 0.0;
    delta = std::move(din);
    if (li == 0 && conv_) {
      Conv& c = *conv_;
      for (int ch = 0; ch < c.channels; ++ch) {
        for (int i = 0; i < c.out_len(); ++i) {
          const double dz = delta[static_cast<std::size_t>(ch) * c.out_len() + i];
          if (dz == 0.0) continue;
          c.gb[ch] += dz;
          for (int k = 0; k < c.kernel; ++k)
            c.gw[static_cast<std::size_t>(ch) * c.kernel + k] += dz * x[i + k];
        }
      }
      break;
    }
  }
  return loss;
}

void Mlp::sgd_step(double lr, int batch_count) {
  const double scale = lr / static_cast<double>(batch_count);
  if (conv_) {
    for (std::size_t i = 0; i < conv_->w.size(); ++i) conv_->w[i] -= scale * conv_->gw[i];
    for (std::size_t i = 0; i < conv_->b.size(); ++i) conv_->b[i] -= scale * conv_->gb[i];
  }
  for (auto& d : dense_) {
    for (std::size_t i = 0; i < d.w.size(); ++i) d.w[i] -= scale * d.gw[i];
    for (std::size_t i = 0; i < d.b.size(); ++i) d.b[i] -= scale * d.gb[i];
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  if (conv_) n += conv_->w.size() + conv_->b.size();
  for (const auto& d : dense_) n += d.w.size() + d.b.size();
  return n;
}

namespace {

// Flat parameter order: conv w, conv b, then per dense layer w, b.
double* locate_flat(std::size_t i, std::vector<std::vector<double>*> blocks) {
  for (auto* block : blocks) {
    if (i < block->size()) return &(*block)[i];
    i -= block->size();
  }
  throw CompatError("parameter index out of range");
}

}  // namespace

double Mlp::get_param(std::size_t i) const {
  auto* self = const_cast<Mlp*>(this);
  std::vector<std::vector<double>*> blocks;
  if (self->conv_) blocks.insert(blocks.end(), {&self->conv_->w, &self->conv_->b});
  for (auto& d : self->dense_) blocks.insert(blocks.end(), {&d.w, &d.b});
  return *locate_flat(i, blocks);
}

void Mlp::set_param(std::size_t i, double v) {
  std::vector<std::vector<double>*> blocks;
  if (conv_) blocks.insert(blocks.end(), {&conv_->w, &conv_->b});
  for (auto& d : dense_) blocks.insert(blocks.end(), {&d.w, &d.b});
  *locate_flat(i, blocks) = v;
}

double Mlp::get_grad(std::size_t i) const {
  auto* self = const_cast<Mlp*>(this);
  std::vector<std::vector<double>*> blocks;
  if (self->conv_) blocks.insert(blocks.end(), {&self->conv_->gw, &self->conv_->gb});
  for (auto& d : self->dense_) blocks.insert(blocks.end(), {&d.gw, &d.gb});
  return *locate_flat(i, blocks);
}

double Mlp::min_abs_preactivation(const std::vector<double>& x) const {
  std::vector<std::vector<double>> pre, act;
  forward(x, pre, act);
  double best = std::numeric_limits<double>::infinity();
  // The last pre vector is the linear output layer; only ReLU layers count.
  for (std::size_t l = 0; l + 1 < pre.size(); ++l)
    for (double z : pre[l]) best = std::min(best, std::abs(z));
  return best;
}

double grad_check(Mlp& model, const std::vector<std::vector<double>>& xs,
                  const std::vector<int>& labels, double epsilon) {
  if (xs.empty() || xs.size() != labels.size())
    throw DataError("gradient check needs a nonempty batch");

  model.zero_grads();
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    loss += model.accumulate_gradients(xs[i], labels[i]);
  if (!std::isfinite(loss)) throw DataError("loss is not finite");

  const auto n = static_cast<double>(xs.size());
  double max_rel = 0.0;
  for (std::size_t p = 0; p < model.param_count(); ++p) {
    const double analytic = model.get_grad(p) / n;
    const double orig = model.get_param(p);
    model.set_param(p, orig + epsilon);
    const double lp = model.batch_loss(xs, labels);
    model.set_param(p, orig - epsilon);
    const double lm = model.batch_loss(xs, labels);
    model.set_param(p, orig);
    const double fd = (lp - lm) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic - fd) / denom);
  }
  return max_rel;
}

}  // namespace sliceforge
