#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glmsnn/conventional.hpp"
#include "glmsnn/data_io.hpp"
#include "glmsnn/glm.hpp"
#include "glmsnn/inference.hpp"

namespace glmsnn {

inline constexpr int kConfigVersion = 1;

enum class Trainer { kConventional, kFirstToSpike };
enum class EncodingMode { kResample, kFrozen };

std::string to_string(Trainer trainer);
Trainer trainer_from_string(const std::string& name);
std::string to_string(EncodingMode mode);
EncodingMode encoding_mode_from_string(const std::string& name);

struct DatasetConfig {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  /// Optional separate test files; when empty both splits come from the
  /// training files.
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  DatasetSpec spec{{5, 7}, 1000, 1000};
};

struct ModelConfig {
  int horizon = 4;
  int syn_basis = 4;
  int fb_basis = 4;
  /// 0 means "same as horizon".
  int syn_window = 0;
  int fb_window = 0;
  BasisKind basis_kind = BasisKind::kRaisedCosine;
  RaisedCosineConfig cosine;
};

struct TrainingConfig {
  Trainer trainer = Trainer::kFirstToSpike;
  std::vector<double> learning_rates{1e-3, 1e-4};
  int epochs = 200;
  /// Folds for learning-rate selection; <= 1 or a single candidate skips it.
  int cv_folds = 10;
  DesiredOutputScheme desired;
  EncodingMode encoding = EncodingMode::kResample;
  double init_range = 1.0;
};

struct EvaluationConfig {
  std::vector<Decoder> decoders{Decoder::kRate, Decoder::kFirstToSpike};
  Sampling sampling = Sampling::kStochastic;
  int trials_per_example = 1;
};

/// Everything a run depends on. Serialized as a versioned JSON document; see
/// README for the keys.
struct ExperimentConfig {
  DatasetConfig dataset;
  ModelConfig model;
  TrainingConfig training;
  EvaluationConfig evaluation;
  std::uint64_t seed = 1;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing keys take their defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical (sorted-key) JSON of the config.
std::string config_digest(const ExperimentConfig& config);

ModelDims model_dims(const ExperimentConfig& config, int n_inputs, int n_outputs);
/// Zero model with the configured bases.
ModelParams blank_model(const ExperimentConfig& config, int n_inputs, int n_outputs);

/// Loads the IDX files named in the config and selects the subsets.
DatasetSplit load_dataset(const ExperimentConfig& config);

struct TrainResult {
  ModelParams model;
  std::vector<double> epoch_loglik;
};

/// Initializes U[-r, r] from `seed` and runs `epochs` epochs at `learning_rate`.
TrainResult train_model(const ExperimentConfig& config, std::span<const LabeledImage> train,
                        int n_inputs, int n_outputs, double learning_rate, std::uint64_t seed);

struct CvScore {
  double learning_rate = 0.0;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  bool diverged = false;
};

struct CvResult {
  std::vector<CvScore> scores;
  double selected_rate = 0.0;
};

/// k-fold selection of the learning rate by mean validation accuracy under
/// the decoder matching the trainer. A candidate whose training fails
/// numerically scores as diverged and cannot win.
CvResult select_learning_rate(const ExperimentConfig& config, std::span<const LabeledImage> train,
                              int n_inputs, int n_outputs);

struct TrainOutcome {
  ModelParams model;
  CvResult cv;
  std::vector<double> epoch_loglik;
};

/// Learning-rate selection followed by a full retrain. When `out_dir` is set
/// writes checkpoint.json, training_curve.csv, cv.csv and config.json there.
TrainOutcome run_train(const ExperimentConfig& config, const DatasetSplit& data,
                       const std::optional<std::filesystem::path>& out_dir);

struct ResultRow {
  std::string config_digest;
  Decoder decoder = Decoder::kRate;
  int basis_count = 0;
  int horizon = 0;
  int n_outputs = 0;
  double accuracy = 0.0;
  double mean_ops = 0.0;
  double mean_decision_time = 0.0;
  double fallback_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Evaluates each configured decoder on `test`. Throws ConsistencyError when
/// the checkpoint dimensions disagree with the config.
std::vector<ResultRow> run_eval(const ModelParams& model, const ExperimentConfig& config,
                                std::span<const LabeledImage> test);

enum class SweepAxis { kBasisCount, kHorizon };
SweepAxis sweep_axis_from_string(const std::string& name);

/// Config for one sweep point: K sets both basis counts; T also sets K = T.
/// Each point gets its own derived seed.
ExperimentConfig sweep_point_config(const ExperimentConfig& base, SweepAxis axis, int value);

/// Retrains from scratch per value and evaluates every decoder. Per-point
/// artifacts go to out_dir/<axis>_<value>/ when out_dir is set.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const DatasetSplit& data,
                                 SweepAxis axis, std::span<const int> values,
                                 const std::optional<std::filesystem::path>& out_dir);

// CSV --------------------------------------------------------------------

std::string result_csv_header();
std::string to_csv_line(const ResultRow& row);
/// Appends rows, writing the header first if the file is new or empty. An
/// existing file whose header differs raises FormatError.
void append_results_csv(const std::filesystem::path& path, std::span<const ResultRow> rows);
/// Strict reader: header must match and each line must have the full column
/// count. Throws FormatError.
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

void write_training_curve(const std::filesystem::path& path, std::span<const double> epoch_loglik);

}  // namespace glmsnn
