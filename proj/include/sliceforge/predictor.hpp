#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sliceforge/nn.hpp"
#include "sliceforge/traffic.hpp"

namespace sliceforge {

// Ground-truth labeler: KPI classification followed by the need->slice map.
// Unmatched KPI combinations fall back to the broadband class for labeling.
SliceKind oracle_label(const RequestRecord& r);

struct PredictorTrainConfig {
  double train_fraction = 0.65;
  // Defaults sized by reference runs on 10k oracle-labeled records: 50 epochs
  // at 0.1 fully separates the noise-free labels where 30 epochs plateaus
  // just short.
  int epochs = 50;
  double learning_rate = 0.1;
  int batch_size = 32;
  std::uint64_t seed = 42;
  // Exactly five hidden layers: with the input and softmax output layers the
  // network is seven layers deep.
  std::vector<int> hidden = {64, 64, 32, 32, 16};
  bool conv_front = false;
  int conv_channels = 2;
  int conv_kernel = 5;
};

struct SlicePrediction {
  std::array<double, 3> probs;  // Embb, Mmtc, Urllc
  SliceKind slice;              // argmax, ties broken by class order
};

class SlicePredictor {
 public:
  SlicePredictor(Mlp net, EncodingBounds bounds, std::uint64_t seed);

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  const EncodingBounds& bounds() const { return bounds_; }
  std::uint64_t seed() const { return seed_; }

  SlicePrediction predict(const std::vector<double>& features) const;
  SlicePrediction predict_record(const RequestRecord& r) const;

 private:
  Mlp net_;
  EncodingBounds bounds_;
  std::uint64_t seed_;
};

struct TrainOutput {
  SlicePredictor model;
  std::vector<double> epoch_loss;           // mean training cross-entropy per epoch
  std::vector<std::size_t> train_indices;   // into the input record list
  std::vector<std::size_t> heldout_indices;
};

// Deterministic SGD training on encoded records. Throws DataError if the
// dataset is empty or the training split misses a class.
TrainOutput train_predictor(const std::vector<RequestRecord>& records,
                            const std::vector<SliceKind>& labels,
                            const PredictorTrainConfig& config);
// Labels from the rule oracle.
TrainOutput train_predictor(const std::vector<RequestRecord>& records,
                            const PredictorTrainConfig& config);

double accuracy_on(const SlicePredictor& model, const std::vector<RequestRecord>& records,
                   const std::vector<SliceKind>& labels,
                   const std::vector<std::size_t>& indices);

// Versioned JSON checkpoint with full-precision weights, the encoding bounds,
// and the training seed. Loading validates the layer chain.
void save_checkpoint(const SlicePredictor& model, const std::string& path);
SlicePredictor load_checkpoint(const std::string& path);

}  // namespace sliceforge
