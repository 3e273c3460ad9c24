// Command-line driver: train, eval, sweep, gradcheck, encode-preview.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "glmsnn/checkpoint.hpp"
#include "glmsnn/data_io.hpp"
#include "glmsnn/encoding.hpp"
#include "glmsnn/error.hpp"
#include "glmsnn/experiment.hpp"
#include "glmsnn/verify.hpp"

namespace fs = std::filesystem;
using namespace glmsnn;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kData = 5,
  kGradCheckFailed = 6,
};

constexpr double kGradCheckThreshold = 1e-5;

ExperimentConfig config_with_overrides(const std::string& path, std::optional<std::uint64_t> seed) {
  ExperimentConfig c = load_config(path);
  if (seed) c.seed = *seed;
  return c;
}

void print_rows(const std::vector<ResultRow>& rows) {
  std::cout << result_csv_header() << '\n';
  for (const ResultRow& r : rows) std::cout << to_csv_line(r) << '\n';
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed, const fs::path& out) {
  const ExperimentConfig config = config_with_overrides(config_path, seed);
  const DatasetSplit data = load_dataset(config);
  const TrainOutcome outcome = run_train(config, data, out);
  for (const CvScore& s : outcome.cv.scores) {
    std::printf("cv  eta=%g  mean_accuracy=%.4f%s\n", s.learning_rate, s.mean_accuracy,
                s.diverged ? "  (diverged)" : "");
  }
  std::printf("selected eta=%g, final epoch mean loglik=%.6f\n", outcome.cv.selected_rate,
              outcome.epoch_loglik.empty() ? 0.0 : outcome.epoch_loglik.back());
  std::printf("checkpoint written to %s\n", (out / "checkpoint.json").string().c_str());
  return kOk;
}

int cmd_eval(const std::string& config_path, std::optional<std::uint64_t> seed,
             const fs::path& checkpoint, const fs::path& out) {
  const ExperimentConfig config = config_with_overrides(config_path, seed);
  const ModelParams model = load_checkpoint(checkpoint);
  const DatasetSplit data = load_dataset(config);
  const std::vector<ResultRow> rows = run_eval(model, config, data.test);
  fs::create_directories(out);
  append_results_csv(out / "results.csv", rows);
  print_rows(rows);
  return kOk;
}

int cmd_sweep(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& axis, const std::vector<int>& values, const fs::path& out) {
  const ExperimentConfig config = config_with_overrides(config_path, seed);
  const DatasetSplit data = load_dataset(config);
  fs::create_directories(out);
  const std::vector<ResultRow> rows =
      run_sweep(config, data, sweep_axis_from_string(axis), values, out);
  append_results_csv(out / "results.csv", rows);
  print_rows(rows);
  return kOk;
}

int cmd_gradcheck(const std::string& trainer, int instances, std::uint64_t seed, double step) {
  const bool conventional = trainer == "both" || trainer == "conventional";
  const bool first = trainer == "both" || trainer == "first_to_spike";
  if (!conventional && !first) throw ConfigError("--trainer must be conventional, first_to_spike or both");

  Rng rng(seed);
  GradCheckReport worst;
  std::string worst_trainer;
  for (int n = 0; n < instances; ++n) {
    const RandomInstance inst = random_instance(rng);
    const auto consider = [&](const GradCheckReport& r, const char* name) {
      if (worst_trainer.empty() || r.max_rel_error > worst.max_rel_error) {
        worst = r;
        worst_trainer = name;
      }
    };
    if (conventional) consider(gradcheck_conventional(inst.params, inst.example, {}, step), "conventional");
    if (first) consider(gradcheck_first_to_spike(inst.params, inst.example, step), "first_to_spike");
  }
  std::printf("instances:      %d\n", instances);
  std::printf("step:           %g\n", worst.step);
  std::printf("max_rel_error:  %.3e\n", worst.max_rel_error);
  std::printf("worst:          %s %s (analytic %.12g, numeric %.12g)\n", worst_trainer.c_str(),
              worst.worst_coordinate.c_str(), worst.analytic_at_worst, worst.numeric_at_worst);
  const bool ok = worst.max_rel_error <= kGradCheckThreshold;
  std::printf("result:         %s (threshold %g)\n", ok ? "PASS" : "FAIL", kGradCheckThreshold);
  return ok ? kOk : kGradCheckFailed;
}

int cmd_encode_preview(const fs::path& images, const fs::path& labels, std::size_t index, int horizon,
                       std::uint64_t seed) {
  const std::vector<RawImage> data = load_idx(images, labels);
  if (index >= data.size()) throw CapacityError("index beyond the number of records");
  Rng rng(seed);
  const SpikeRaster x = rate_encode(data[index].pixels, static_cast<std::size_t>(horizon), rng);
  std::printf("record %zu, digit %d, T = %d, spike fraction %.4f\n", index, data[index].label, horizon,
              spike_fraction(x));
  // One character per pixel: number of spikes over the horizon (0-9, '+' above 9).
  for (int r = 0; r < kMnistRows; ++r) {
    std::string line;
    for (int c = 0; c < kMnistCols; ++c) {
      const auto train = x.train(static_cast<std::size_t>(r * kMnistCols + c));
      std::size_t n = 0;
      for (std::uint8_t b : train) n += b;
      line += n == 0 ? '.' : (n > 9 ? '+' : static_cast<char>('0' + n));
    }
    std::printf("%s\n", line.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer GLM spiking network: training, decoding and complexity experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";

  auto* train = app.add_subcommand("train", "cross-validate the learning rate, train, write a checkpoint");
  train->add_option("-c,--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("-s,--seed", seed, "override the config seed");
  train->add_option("-o,--out", out_dir, "output directory");

  std::string checkpoint;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; appends rows to <out>/results.csv");
  eval->add_option("-c,--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("-k,--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("-s,--seed", seed, "override the config seed");
  eval->add_option("-o,--out", out_dir, "output directory");

  std::string axis;
  std::vector<int> values;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate one model per K or T value");
  sweep->add_option("-c,--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("-a,--axis", axis, "K or T")->required();
  sweep->add_option("-v,--values", values, "comma-separated values")->required()->delimiter(',');
  sweep->add_option("-s,--seed", seed, "override the config seed");
  sweep->add_option("-o,--out", out_dir, "output directory");

  std::string trainer = "both";
  int instances = 20;
  std::uint64_t gc_seed = 1;
  double step = kDefaultFiniteDiffStep;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  gradcheck->add_option("-t,--trainer", trainer, "conventional | first_to_spike | both");
  gradcheck->add_option("-n,--instances", instances, "random instances")->check(CLI::PositiveNumber);
  gradcheck->add_option("-s,--seed", gc_seed, "rng seed");
  gradcheck->add_option("--step", step, "finite-difference step")->check(CLI::PositiveNumber);

  std::string images;
  std::string labels;
  std::size_t index = 0;
  int horizon = 4;
  std::uint64_t preview_seed = 1;
  auto* preview = app.add_subcommand("encode-preview", "rate-encode one image and print spike counts");
  preview->add_option("--images", images, "IDX image file")->required();
  preview->add_option("--labels", labels, "IDX label file")->required();
  preview->add_option("-i,--index", index, "record index");
  preview->add_option("-T,--horizon", horizon, "number of time steps")->check(CLI::PositiveNumber);
  preview->add_option("-s,--seed", preview_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return cmd_train(config_path, seed, out_dir);
    if (*eval) return cmd_eval(config_path, seed, checkpoint, out_dir);
    if (*sweep) return cmd_sweep(config_path, seed, axis, values, out_dir);
    if (*gradcheck) return cmd_gradcheck(trainer, instances, gc_seed, step);
    if (*preview) return cmd_encode_preview(images, labels, index, horizon, preview_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}
