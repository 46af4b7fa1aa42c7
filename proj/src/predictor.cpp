#include "sliceforge/predictor.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "sliceforge/rng.hpp"

namespace sliceforge {

SliceKind oracle_label(const RequestRecord& r) {
  const ServiceNeed need = classify_need(r);
  if (need == ServiceNeed::Unmatched) return SliceKind::Embb;
  return primary_slice_for(need);
}

SlicePredictor::SlicePredictor(Mlp net, EncodingBounds bounds, std::uint64_t seed)
    : net_(std::move(net)), bounds_(bounds), seed_(seed) {
  if (net_.output_dim() != 3)
    throw CompatError("slice predictor must have 3 output classes");
}

SlicePrediction SlicePredictor::predict(const std::vector<double>& features) const {
  std::vector<double> p = net_.probs(features);
  SlicePrediction out;
  out.probs = {p[0], p[1], p[2]};
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (p[i] > p[best]) best = i;  // strict: ties keep the lower class index
  out.slice = static_cast<SliceKind>(best);
  return out;
}

SlicePrediction SlicePredictor::predict_record(const RequestRecord& r) const {
  return predict(encode_features(r, bounds_));
}

namespace {

Mlp build_net(const PredictorTrainConfig& config) {
  if (config.hidden.size() != 5)
    throw ConfigError("the slice predictor uses exactly five hidden layers");
  MlpConfig mc;
  mc.input_dim = kFeatureDim;
  mc.hidden = config.hidden;
  mc.output_dim = 3;
  if (config.conv_front)
    mc.conv_front = Conv1dSpec{config.conv_channels, config.conv_kernel};
  return Mlp(mc, config.seed);
}

}  // namespace

TrainOutput train_predictor(const std::vector<RequestRecord>& records,
                            const std::vector<SliceKind>& labels,
                            const PredictorTrainConfig& config) {
  if (records.empty()) throw DataError("training dataset is empty");
  if (records.size() != labels.size())
    throw DataError("records and labels differ in length");
  if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0)
    throw ConfigError("train fraction must be in (0, 1)");
  if (config.epochs <= 0 || config.batch_size <= 0 || config.learning_rate <= 0.0)
    throw ConfigError("epochs, batch size, and learning rate must be positive");

  std::array<std::size_t, 3> class_counts = {0, 0, 0};
  for (SliceKind k : labels) {
    if (k == SliceKind::Master) throw DataError("labels must be service slices");
    ++class_counts[static_cast<int>(k)];
  }
  for (int c = 0; c < 3; ++c)
    if (class_counts[c] == 0)
      throw DataError(std::string("dataset has no examples of class ") +
                      to_string(static_cast<SliceKind>(c)));

  const EncodingBounds bounds;
  std::vector<std::vector<double>> features;
  features.reserve(records.size());
  for (const auto& r : records) features.push_back(encode_features(r, bounds));

  Rng rng(derive_seed(config.seed, 17));
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const auto train_n = static_cast<std::size_t>(
      static_cast<double>(records.size()) * config.train_fraction);
  if (train_n == 0 || train_n == records.size())
    throw DataError("split leaves one side empty");
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + train_n);
  std::vector<std::size_t> heldout_idx(order.begin() + train_n, order.end());

  std::array<std::size_t, 3> train_counts = {0, 0, 0};
  for (std::size_t i : train_idx) ++train_counts[static_cast<int>(labels[i])];
  for (int c = 0; c < 3; ++c)
    if (train_counts[c] == 0)
      throw DataError(std::string("training split has no examples of class ") +
                      to_string(static_cast<SliceKind>(c)));

  Mlp net = build_net(config);
  std::vector<double> epoch_loss;
  std::vector<std::size_t> sweep = train_idx;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(sweep);
    double loss_sum = 0.0;
    std::size_t pos = 0;
    while (pos < sweep.size()) {
      const std::size_t batch_end =
          std::min(pos + static_cast<std::size_t>(config.batch_size), sweep.size());
      net.zero_grads();
      for (std::size_t i = pos; i < batch_end; ++i)
        loss_sum += net.accumulate_gradients(features[sweep[i]],
                                             static_cast<int>(labels[sweep[i]]));
      net.sgd_step(config.learning_rate, static_cast<int>(batch_end - pos));
      pos = batch_end;
    }
    epoch_loss.push_back(loss_sum / static_cast<double>(sweep.size()));
  }

  return TrainOutput{SlicePredictor(std::move(net), bounds, config.seed),
                     std::move(epoch_loss), std::move(train_idx),
                     std::move(heldout_idx)};
}

TrainOutput train_predictor(const std::vector<RequestRecord>& records,
                            const PredictorTrainConfig& config) {
  std::vector<SliceKind> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(oracle_label(r));
  return train_predictor(records, labels, config);
}

double accuracy_on(const SlicePredictor& model, const std::vector<RequestRecord>& records,
                   const std::vector<SliceKind>& labels,
                   const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw DataError("accuracy over an empty index set");
  std::size_t hits = 0;
  for (std::size_t i : indices)
    if (model.predict_record(records[i]).slice == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

namespace {

using nlohmann::json;

json bounds_to_json(const EncodingBounds& b) {
  return json{{"delay", {b.delay_min, b.delay_max}},
              {"ttl", {b.ttl_min, b.ttl_max}},
              {"hour", {b.hour_min, b.hour_max}},
              {"ue_category", {b.ue_min, b.ue_max}}};
}

EncodingBounds bounds_from_json(const json& j) {
  EncodingBounds b;
  b.delay_min = j.at("delay").at(0);
  b.delay_max = j.at("delay").at(1);
  b.ttl_min = j.at("ttl").at(0);
  b.ttl_max = j.at("ttl").at(1);
  b.hour_min = j.at("hour").at(0);
  b.hour_max = j.at("hour").at(1);
  b.ue_min = j.at("ue_category").at(0);
  b.ue_max = j.at("ue_category").at(1);
  return b;
}

}  // namespace

void save_checkpoint(const SlicePredictor& model, const std::string& path) {
  const Mlp& net = model.net();
  const MlpConfig& cfg = net.config();

  json j;
  j["format"] = "sliceforge-predictor";
  j["version"] = 1;
  j["seed"] = model.seed();
  j["bounds"] = bounds_to_json(model.bounds());
  j["input_dim"] = cfg.input_dim;
  j["output_dim"] = cfg.output_dim;
  j["hidden"] = cfg.hidden;
  if (cfg.conv_front) {
    j["conv"] = {{"channels", cfg.conv_front->channels},
                 {"kernel", cfg.conv_front->kernel}};
  } else {
    j["conv"] = nullptr;
  }
  std::vector<double> params(net.param_count());
  for (std::size_t i = 0; i < params.size(); ++i) params[i] = net.get_param(i);
  j["params"] = params;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
  out << j.dump(2) << '\n';
}

SlicePredictor load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }

  try {
    if (j.at("format") != "sliceforge-predictor" || j.at("version") != 1)
      throw CompatError("unsupported checkpoint format/version");

    MlpConfig cfg;
    cfg.input_dim = j.at("input_dim");
    cfg.output_dim = j.at("output_dim");
    cfg.hidden = j.at("hidden").get<std::vector<int>>();
    if (!j.at("conv").is_null())
      cfg.conv_front =
          Conv1dSpec{j.at("conv").at("channels"), j.at("conv").at("kernel")};

    Mlp net(cfg, 0);
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count())
      throw CompatError("checkpoint parameter count does not match its layer shapes");
    for (std::size_t i = 0; i < params.size(); ++i) net.set_param(i, params[i]);

    return SlicePredictor(std::move(net), bounds_from_json(j.at("bounds")),
                          j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace sliceforge
