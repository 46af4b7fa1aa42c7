// sliceforge - slice orchestration simulator CLI.
//
// Subcommands: gen-traffic, train, simulate, evaluate, report.
// Exit codes: 0 success, 2 input/config error, 3 data error, 4 compatibility
// error. All randomness flows from --seed (or SLICEFORGE_SEED).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sliceforge/metrics.hpp"
#include "sliceforge/predictor.hpp"
#include "sliceforge/sim.hpp"

namespace sf = sliceforge;

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SLICEFORGE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw sf::ConfigError("SLICEFORGE_SEED is not an integer");
    return v;
  }
  return fallback;
}

int cmd_gen_traffic(const std::string& config_path, const std::string& preset,
                    const std::string& out_path,
                    const std::optional<std::uint64_t>& total,
                    const std::optional<std::uint64_t>& seed) {
  sf::Scenario scenario = config_path.empty() ? sf::preset_scenario(preset)
                                              : sf::load_scenario_file(config_path);
  if (total) scenario.traffic.total_requests = *total;
  scenario.traffic.seed = resolve_seed(seed, scenario.traffic.seed);

  const auto stream =
      sf::generate_stream(scenario.traffic, sf::profile_table(), scenario.surge);
  sf::write_dataset(out_path, stream);

  std::array<std::uint64_t, 3> counts = {0, 0, 0};
  for (const auto& r : stream) ++counts[static_cast<int>(sf::oracle_label(r))];
  std::cout << "wrote " << stream.size() << " requests to " << out_path << "\n";
  for (int c = 0; c < 3; ++c)
    std::cout << "  " << sf::to_string(static_cast<sf::SliceKind>(c)) << ": "
              << counts[c] << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, double split,
              const std::optional<std::uint64_t>& seed, const std::string& out_path,
              int epochs, double lr, int batch, bool conv_front) {
  const sf::DatasetLoad load = sf::load_dataset(data_path);
  for (const auto& e : load.errors)
    std::cerr << "line " << e.line << ": " << e.message << "\n";
  if (load.records.empty()) throw sf::DataError("dataset has no valid rows");

  sf::PredictorTrainConfig config;
  config.train_fraction = split;
  config.seed = resolve_seed(seed, config.seed);
  config.epochs = epochs;
  config.learning_rate = lr;
  config.batch_size = batch;
  config.conv_front = conv_front;

  std::vector<sf::SliceKind> labels;
  labels.reserve(load.records.size());
  for (const auto& r : load.records) labels.push_back(sf::oracle_label(r));

  const sf::TrainOutput out = sf::train_predictor(load.records, labels, config);

  std::vector<std::pair<sf::SliceKind, sf::SliceKind>> pairs;
  pairs.reserve(out.heldout_indices.size());
  for (std::size_t i : out.heldout_indices)
    pairs.emplace_back(labels[i], out.model.predict_record(load.records[i]).slice);

  std::cout << "trained on " << out.train_indices.size() << " rows, evaluating on "
            << out.heldout_indices.size() << " held-out rows\n";
  std::cout << "training loss: first epoch " << out.epoch_loss.front()
            << ", last epoch " << out.epoch_loss.back() << "\n";
  const sf::MetricsReport report = sf::metrics(sf::confusion(pairs));
  std::cout << sf::format_report(report);
  std::cout << sf::format_confusion(sf::confusion(pairs));

  sf::save_checkpoint(out.model, out_path);
  std::cout << "checkpoint written to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& scenario_arg, const std::string& model_arg,
                 const std::string& out_dir, const std::optional<std::uint64_t>& seed,
                 double scale) {
  sf::Scenario scenario = sf::resolve_scenario(scenario_arg);
  scenario.traffic.seed = resolve_seed(seed, scenario.traffic.seed);
  if (scale != 1.0) sf::apply_scale(scenario, scale);
  if (model_arg != "oracle") {
    scenario.predictor_mode = sf::PredictorMode::TrainedModel;
    scenario.checkpoint_path = model_arg;
  }

  std::filesystem::create_directories(out_dir);
  const sf::SimulationResult result = sf::run(scenario);

  const auto dir = std::filesystem::path(out_dir);
  sf::write_samples_csv((dir / "samples.csv").string(), result.samples);
  sf::write_decisions_csv((dir / "decisions.csv").string(), result.decisions);
  sf::write_totals_json((dir / "totals.json").string(), result.totals);
  if (!result.eval_pairs.empty())
    sf::write_pairs_csv((dir / "pairs.csv").string(), result.eval_pairs);

  const sf::Totals& t = result.totals;
  std::cout << "scenario " << scenario.name << ": " << t.arrivals << " arrivals, "
            << result.samples.size() << " sample rows\n";
  std::cout << "  admitted " << t.admitted << ", overflow " << t.overflow_redirected
            << ", failure " << t.failure_redirected << ", unmatched "
            << t.unmatched_fallback << ", rejected " << t.rejected << "\n";
  std::cout << "  dropped " << t.dropped << ", rehomed " << t.rehomed << ", released "
            << t.released << ", still active " << t.still_active << "\n";
  std::cout << "results in " << out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pairs_path, bool micro) {
  const auto pairs = sf::read_pairs_csv(pairs_path);
  if (pairs.empty()) throw sf::DataError("pairs file has no rows");
  const sf::ConfusionMatrix m = sf::confusion(pairs);
  std::cout << sf::format_report(sf::metrics(m), micro);
  std::cout << sf::format_confusion(m);
  return 0;
}

int cmd_report(const std::string& samples_path, const std::string& kind,
               const std::string& out_path, double skip_warmup) {
  const auto samples = sf::read_samples_csv(samples_path);
  sf::SeriesKind k;
  if (kind == "active") k = sf::SeriesKind::ActiveUsers;
  else if (kind == "util") k = sf::SeriesKind::Utilization;
  else if (kind == "counters") k = sf::SeriesKind::Counters;
  else throw sf::ConfigError("kind must be active, util, or counters");
  sf::export_series(samples, k, out_path, skip_warmup);
  std::cout << "wrote " << kind << " series to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"5G slice orchestration simulator"};
  app.require_subcommand(1);

  // gen-traffic
  auto* gen = app.add_subcommand("gen-traffic", "generate a synthetic request stream");
  std::string gen_config, gen_preset = "baseline-20h", gen_out;
  std::optional<std::uint64_t> gen_total, gen_seed;
  gen->add_option("--config", gen_config, "scenario JSON file");
  gen->add_option("--preset", gen_preset, "preset name when no --config is given");
  gen->add_option("--out", gen_out, "output CSV path")->required();
  gen->add_option("--total", gen_total, "override total request count");
  gen->add_option("--seed", gen_seed, "RNG seed");

  // train
  auto* train = app.add_subcommand("train", "train the slice predictor");
  std::string train_data, train_out;
  double train_split = 0.65, train_lr = 0.1;
  int train_epochs = 50, train_batch = 32;
  bool train_conv = false;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--data", train_data, "dataset CSV")->required();
  train->add_option("--split", train_split, "training fraction (default 0.65)");
  train->add_option("--seed", train_seed, "RNG seed");
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--epochs", train_epochs, "training epochs");
  train->add_option("--lr", train_lr, "SGD learning rate");
  train->add_option("--batch", train_batch, "minibatch size");
  train->add_flag("--conv-front", train_conv,
                  "use a 1-d convolution as the first hidden layer");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a scenario");
  std::string sim_scenario, sim_model = "oracle", sim_out;
  std::optional<std::uint64_t> sim_seed;
  double sim_scale = 1.0;
  sim->add_option("--scenario", sim_scenario, "preset name or scenario JSON file")
      ->required();
  sim->add_option("--model", sim_model, "checkpoint path or 'oracle'");
  sim->add_option("--out-dir", sim_out, "output directory")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--scale", sim_scale, "request-count scale factor");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score a (true, predicted) pairs file");
  std::string eval_pairs;
  bool eval_micro = false;
  eval->add_option("--pairs", eval_pairs, "pairs CSV")->required();
  eval->add_flag("--micro", eval_micro, "also print micro-averaged metrics");

  // report
  auto* rep = app.add_subcommand("report", "export plot series from samples.csv");
  std::string rep_samples, rep_kind = "active", rep_out;
  double rep_skip = 1.0;
  rep->add_option("--samples", rep_samples, "samples.csv from simulate")->required();
  rep->add_option("--kind", rep_kind, "active, util, or counters");
  rep->add_option("--out", rep_out, "output CSV path")->required();
  rep->add_option("--skip-warmup", rep_skip, "hours to drop from the start (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen_traffic(gen_config, gen_preset, gen_out, gen_total, gen_seed);
    if (train->parsed())
      return cmd_train(train_data, train_split, train_seed, train_out, train_epochs,
                       train_lr, train_batch, train_conv);
    if (sim->parsed())
      return cmd_simulate(sim_scenario, sim_model, sim_out, sim_seed, sim_scale);
    if (eval->parsed()) return cmd_evaluate(eval_pairs, eval_micro);
    if (rep->parsed()) return cmd_report(rep_samples, rep_kind, rep_out, rep_skip);
  } catch (const sf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sf::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sf::CompatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
