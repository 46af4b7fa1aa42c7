#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sliceforge/errors.hpp"

namespace sliceforge {

struct Conv1dSpec {
  int channels = 2;
  int kernel = 5;
};

struct MlpConfig {
  int input_dim = 0;
  std::vector<int> hidden;  // widths of the hidden layers, in order
  int output_dim = 0;
  // When set, the first hidden layer is a 1-d convolution over the feature
  // vector (valid padding, stride 1, ReLU); hidden[0] is replaced by its
  // flattened output and hidden[1..] stay dense.
  std::optional<Conv1dSpec> conv_front;
};

// Feedforward classifier: dense ReLU hidden layers and a linear output layer
// read through softmax. Plain double math, explicit backprop, no BLAS.
class Mlp {
 public:
  Mlp(MlpConfig cfg, std::uint64_t seed);

  const MlpConfig& config() const { return cfg_; }
  int input_dim() const { return cfg_.input_dim; }
  int output_dim() const { return cfg_.output_dim; }

  std::vector<double> logits(const std::vector<double>& x) const;
  std::vector<double> probs(const std::vector<double>& x) const;  // softmax

  // Mean cross-entropy over a batch, forward only.
  double batch_loss(const std::vector<std::vector<double>>& xs,
                    const std::vector<int>& labels) const;

  void zero_grads();
  // Adds one sample's gradients; returns its cross-entropy loss.
  double accumulate_gradients(const std::vector<double>& x, int label);
  // w -= lr * grad / batch_count
  void sgd_step(double lr, int batch_count);

  // Flat parameter access, fixed order: conv weights, conv bias, then per
  // dense layer weights then bias. Used by the checker and the checkpoint.
  std::size_t param_count() const;
  double get_param(std::size_t i) const;
  void set_param(std::size_t i, double v);
  double get_grad(std::size_t i) const;

  // Smallest |pre-activation| of any ReLU unit on this input. Finite
  // differences are invalid within epsilon of a kink; checkers use this to
  // stay on a differentiable stretch.
  double min_abs_preactivation(const std::vector<double>& x) const;

 private:
  struct Dense {
    int in = 0, out = 0;
    std::vector<double> w, b, gw, gb;  // w is out x in, row-major
  };
  struct Conv {
    int channels = 0, kernel = 0, in_len = 0;
    std::vector<double> w, b, gw, gb;  // w is channels x kernel
    int out_len() const { return in_len - kernel + 1; }
    int out_dim() const { return channels * out_len(); }
  };

  void forward(const std::vector<double>& x, std::vector<std::vector<double>>& pre,
               std::vector<std::vector<double>>& act) const;
  static std::vector<double> softmax(const std::vector<double>& z);

  MlpConfig cfg_;
  std::optional<Conv> conv_;
  std::vector<Dense> dense_;
};

// Maximum relative error between the analytic gradient and a central finite
// difference of the mean batch loss, over every parameter.
double grad_check(Mlp& model, const std::vector<std::vector<double>>& xs,
                  const std::vector<int>& labels, double epsilon = 1e-5);

}  // namespace sliceforge
