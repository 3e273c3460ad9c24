#include "glmsnn/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "glmsnn/checkpoint.hpp"
#include "glmsnn/error.hpp"
#include "glmsnn/first_to_spike.hpp"

namespace glmsnn {

using nlohmann::json;

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kCvStream = 2;
constexpr std::uint64_t kFinalStream = 3;
constexpr std::uint64_t kEvalStream = 4;
constexpr std::uint64_t kSweepStream = 5;
constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kShuffleStream = 11;
constexpr std::uint64_t kEncodeStream = 12;

}  // namespace

std::string to_string(Trainer trainer) {
  return trainer == Trainer::kConventional ? "conventional" : "first_to_spike";
}

Trainer trainer_from_string(const std::string& name) {
  if (name == "conventional" || name == "rate") return Trainer::kConventional;
  if (name == "first_to_spike" || name == "first-to-spike") return Trainer::kFirstToSpike;
  throw ConfigError("unknown trainer '" + name + "'");
}

std::string to_string(EncodingMode mode) {
  return mode == EncodingMode::kResample ? "resample" : "frozen";
}

EncodingMode encoding_mode_from_string(const std::string& name) {
  if (name == "resample") return EncodingMode::kResample;
  if (name == "frozen") return EncodingMode::kFrozen;
  throw ConfigError("unknown encoding mode '" + name + "'");
}

void ExperimentConfig::validate() const {
  try {
    dataset.spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (dataset.spec.digit_set.size() < 2) throw ConfigError("need at least two digits");
  if (model.horizon < 1 || model.syn_basis < 1 || model.fb_basis < 1 || model.syn_window < 0 ||
      model.fb_window < 0) {
    throw ConfigError("model dimensions must be >= 1 (windows may be 0 for 'same as horizon')");
  }
  if (training.learning_rates.empty()) throw ConfigError("learning_rates must be nonempty");
  for (double r : training.learning_rates) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("learning rates must be finite and > 0");
  }
  if (training.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (training.desired.period < 1) throw ConfigError("desired_period must be >= 1");
  if (!(training.init_range >= 0.0)) throw ConfigError("init_range must be >= 0");
  if (evaluation.decoders.empty()) throw ConfigError("at least one decoder is required");
  if (evaluation.trials_per_example < 1) throw ConfigError("trials_per_example must be >= 1");
  if (model.basis_kind == BasisKind::kExplicit) {
    throw ConfigError("explicit bases cannot be configured from a file");
  }
}

json config_to_json(const ExperimentConfig& c) {
  json decoders = json::array();
  for (Decoder d : c.evaluation.decoders) decoders.push_back(to_string(d));
  return {
      {"version", kConfigVersion},
      {"seed", c.seed},
      {"dataset",
       {{"train_images", c.dataset.train_images.string()},
        {"train_labels", c.dataset.train_labels.string()},
        {"test_images", c.dataset.test_images.string()},
        {"test_labels", c.dataset.test_labels.string()},
        {"digits", c.dataset.spec.digit_set},
        {"per_class_train", c.dataset.spec.per_class_train},
        {"per_class_test", c.dataset.spec.per_class_test}}},
      {"model",
       {{"horizon", c.model.horizon},
        {"syn_basis", c.model.syn_basis},
        {"fb_basis", c.model.fb_basis},
        {"syn_window", c.model.syn_window},
        {"fb_window", c.model.fb_window},
        {"basis",
         {{"kind", to_string(c.model.basis_kind)},
          {"log_stretch", c.model.cosine.log_stretch},
          {"offset", c.model.cosine.offset},
          {"first_center_lag", c.model.cosine.first_center_lag},
          {"last_center_lag", c.model.cosine.last_center_lag}}}}},
      {"training",
       {{"trainer", to_string(c.training.trainer)},
        {"learning_rates", c.training.learning_rates},
        {"epochs", c.training.epochs},
        {"cv_folds", c.training.cv_folds},
        {"desired_period", c.training.desired.period},
        {"encoding", to_string(c.training.encoding)},
        {"init_range", c.training.init_range}}},
      {"evaluation",
       {{"decoders", decoders},
        {"sampling", to_string(c.evaluation.sampling)},
        {"trials_per_example", c.evaluation.trials_per_example}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    const int version = j.value("version", kConfigVersion);
    if (version != kConfigVersion) {
      throw ConfigError("unsupported config version " + std::to_string(version));
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      c.dataset.train_images = d.value("train_images", std::string{});
      c.dataset.train_labels = d.value("train_labels", std::string{});
      c.dataset.test_images = d.value("test_images", std::string{});
      c.dataset.test_labels = d.value("test_labels", std::string{});
      c.dataset.spec.digit_set = d.value("digits", c.dataset.spec.digit_set);
      c.dataset.spec.per_class_train = d.value("per_class_train", c.dataset.spec.per_class_train);
      c.dataset.spec.per_class_test = d.value("per_class_test", c.dataset.spec.per_class_test);
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      c.model.horizon = m.value("horizon", c.model.horizon);
      c.model.syn_basis = m.value("syn_basis", c.model.syn_basis);
      c.model.fb_basis = m.value("fb_basis", c.model.syn_basis);
      c.model.syn_window = m.value("syn_window", c.model.syn_window);
      c.model.fb_window = m.value("fb_window", c.model.fb_window);
      if (m.contains("basis")) {
        const json& b = m.at("basis");
        c.model.basis_kind = basis_kind_from_string(b.value("kind", std::string{"raised_cosine"}));
        c.model.cosine.log_stretch = b.value("log_stretch", c.model.cosine.log_stretch);
        c.model.cosine.offset = b.value("offset", c.model.cosine.offset);
        c.model.cosine.first_center_lag = b.value("first_center_lag", c.model.cosine.first_center_lag);
        c.model.cosine.last_center_lag = b.value("last_center_lag", c.model.cosine.last_center_lag);
      }
    }
    if (j.contains("training")) {
      const json& t = j.at("training");
      c.training.trainer = trainer_from_string(t.value("trainer", to_string(c.training.trainer)));
      c.training.learning_rates = t.value("learning_rates", c.training.learning_rates);
      c.training.epochs = t.value("epochs", c.training.epochs);
      c.training.cv_folds = t.value("cv_folds", c.training.cv_folds);
      c.training.desired.period = t.value("desired_period", c.training.desired.period);
      c.training.encoding = encoding_mode_from_string(t.value("encoding", to_string(c.training.encoding)));
      c.training.init_range = t.value("init_range", c.training.init_range);
    }
    if (j.contains("evaluation")) {
      const json& e = j.at("evaluation");
      if (e.contains("decoders")) {
        c.evaluation.decoders.clear();
        for (const json& d : e.at("decoders")) c.evaluation.decoders.push_back(decoder_from_string(d.get<std::string>()));
      }
      c.evaluation.sampling = sampling_from_string(e.value("sampling", to_string(c.evaluation.sampling)));
      c.evaluation.trials_per_example = e.value("trials_per_example", c.evaluation.trials_per_example);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << config_to_json(config).dump(2) << '\n';
}

std::string config_digest(const ExperimentConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

ModelDims model_dims(const ExperimentConfig& config, int n_inputs, int n_outputs) {
  ModelDims d;
  d.n_inputs = n_inputs;
  d.n_outputs = n_outputs;
  d.horizon = config.model.horizon;
  d.syn_window = config.model.syn_window == 0 ? config.model.horizon : config.model.syn_window;
  d.fb_window = config.model.fb_window == 0 ? config.model.horizon : config.model.fb_window;
  d.syn_basis = config.model.syn_basis;
  d.fb_basis = config.model.fb_basis;
  return d;
}

ModelParams blank_model(const ExperimentConfig& config, int n_inputs, int n_outputs) {
  const ModelDims dims = model_dims(config, n_inputs, n_outputs);
  const BasisSpec syn{config.model.basis_kind, dims.syn_basis, dims.syn_window, config.model.cosine};
  const BasisSpec fb{config.model.basis_kind, dims.fb_basis, dims.fb_window, config.model.cosine};
  try {
    return make_model(dims, syn, fb);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
}

DatasetSplit load_dataset(const ExperimentConfig& config) {
  const DatasetConfig& d = config.dataset;
  if (d.train_images.empty() || d.train_labels.empty()) {
    throw ConfigError("dataset.train_images and dataset.train_labels are required");
  }
  const std::vector<RawImage> train = load_idx(d.train_images, d.train_labels);
  const std::uint64_t seed = derive_seed(config.seed, {kSplitStream});
  if (d.test_images.empty() != d.test_labels.empty()) {
    throw ConfigError("dataset.test_images and dataset.test_labels must be given together");
  }
  if (d.test_images.empty()) return select_subset(train, d.spec, seed);
  const std::vector<RawImage> test = load_idx(d.test_images, d.test_labels);
  return select_subset(train, test, d.spec, seed);
}

namespace {

std::vector<EncodedExample> encode_all(std::span<const LabeledImage> data, int horizon,
                                       std::uint64_t seed) {
  std::vector<EncodedExample> out;
  out.reserve(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) {
    Rng rng(derive_seed(seed, {e}));
    out.push_back(rate_encode(data[e].pixels, data[e].label, static_cast<std::size_t>(horizon), rng));
  }
  return out;
}

double run_epoch(const ExperimentConfig& config, ModelParams& model,
                 std::span<const EncodedExample> encoded, double learning_rate, Rng& rng) {
  if (config.training.trainer == Trainer::kConventional) {
    return sgd_epoch_conventional(model, encoded, learning_rate, config.training.desired, rng);
  }
  return sgd_epoch_first_to_spike(model, encoded, learning_rate, rng);
}

Decoder validation_decoder(Trainer trainer) {
  return trainer == Trainer::kConventional ? Decoder::kRate : Decoder::kFirstToSpike;
}

}  // namespace

TrainResult train_model(const ExperimentConfig& config, std::span<const LabeledImage> train,
                        int n_inputs, int n_outputs, double learning_rate, std::uint64_t seed) {
  TrainResult result;
  result.model = blank_model(config, n_inputs, n_outputs);
  Rng init_rng(derive_seed(seed, {kInitStream}));
  init_uniform(result.model, init_rng, -config.training.init_range, config.training.init_range);

  Rng shuffle_rng(derive_seed(seed, {kShuffleStream}));
  const int horizon = result.model.dims.horizon;
  std::vector<EncodedExample> encoded;
  if (config.training.encoding == EncodingMode::kFrozen) {
    encoded = encode_all(train, horizon, derive_seed(seed, {kEncodeStream}));
  }
  for (int epoch = 0; epoch < config.training.epochs; ++epoch) {
    if (config.training.encoding == EncodingMode::kResample) {
      encoded = encode_all(train, horizon,
                           derive_seed(seed, {kEncodeStream, static_cast<std::uint64_t>(epoch)}));
    }
    result.epoch_loglik.push_back(run_epoch(config, result.model, encoded, learning_rate, shuffle_rng));
  }
  return result;
}

CvResult select_learning_rate(const ExperimentConfig& config, std::span<const LabeledImage> train,
                              int n_inputs, int n_outputs) {
  CvResult cv;
  const auto& rates = config.training.learning_rates;
  const int folds = config.training.cv_folds;
  if (rates.size() == 1 || folds <= 1) {
    cv.selected_rate = rates.front();
    return cv;
  }
  if (train.size() < static_cast<std::size_t>(folds)) {
    throw ConfigError("fewer training examples than cross-validation folds");
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng fold_rng(derive_seed(config.seed, {kCvStream}));
  std::shuffle(order.begin(), order.end(), fold_rng);

  EvalOptions eval;
  eval.decoder = validation_decoder(config.training.trainer);
  eval.sampling = config.evaluation.sampling;
  eval.trials_per_example = config.evaluation.trials_per_example;

  for (double rate : rates) {
    CvScore score;
    score.learning_rate = rate;
    for (int f = 0; f < folds; ++f) {
      std::vector<LabeledImage> fit;
      std::vector<LabeledImage> held_out;
      for (std::size_t p = 0; p < order.size(); ++p) {
        (p % static_cast<std::size_t>(folds) == static_cast<std::size_t>(f) ? held_out : fit)
            .push_back(train[order[p]]);
      }
      const std::uint64_t fold_seed = derive_seed(config.seed, {kCvStream, static_cast<std::uint64_t>(f)});
      try {
        const TrainResult r = train_model(config, fit, n_inputs, n_outputs, rate, fold_seed);
        eval.seed = derive_seed(fold_seed, {kEvalStream});
        score.fold_accuracy.push_back(evaluate(r.model, held_out, eval).accuracy);
      } catch (const NumericError&) {
        score.diverged = true;
        break;
      }
    }
    if (!score.diverged) {
      score.mean_accuracy = std::accumulate(score.fold_accuracy.begin(), score.fold_accuracy.end(), 0.0) /
                            static_cast<double>(score.fold_accuracy.size());
    }
    cv.scores.push_back(std::move(score));
  }

  const CvScore* best = nullptr;
  for (const CvScore& s : cv.scores) {
    if (s.diverged) continue;
    if (best == nullptr || s.mean_accuracy > best->mean_accuracy) best = &s;
  }
  if (best == nullptr) throw NumericError("every learning-rate candidate diverged during cross-validation");
  cv.selected_rate = best->learning_rate;
  return cv;
}

namespace {

int class_count(const ExperimentConfig& config) {
  return static_cast<int>(config.dataset.spec.digit_set.size());
}

int input_count(const DatasetSplit& data) {
  const auto& any = data.train.empty() ? data.test : data.train;
  if (any.empty()) throw ConfigError("dataset split is empty");
  return static_cast<int>(any.front().pixels.size());
}

void write_cv_csv(const std::filesystem::path& path, const CvResult& cv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "learning_rate,fold,accuracy,diverged,selected\n";
  for (const CvScore& s : cv.scores) {
    for (std::size_t f = 0; f < s.fold_accuracy.size(); ++f) {
      out << s.learning_rate << ',' << f << ',' << s.fold_accuracy[f] << ',' << s.diverged << ','
          << (s.learning_rate == cv.selected_rate) << '\n';
    }
    if (s.fold_accuracy.empty()) out << s.learning_rate << ",-1,0," << s.diverged << ",0\n";
  }
}

}  // namespace

TrainOutcome run_train(const ExperimentConfig& config, const DatasetSplit& data,
                       const std::optional<std::filesystem::path>& out_dir) {
  config.validate();
  if (data.train.empty()) throw ConfigError("training split is empty");
  const int n_inputs = input_count(data);
  const int n_outputs = class_count(config);

  TrainOutcome outcome;
  outcome.cv = select_learning_rate(config, data.train, n_inputs, n_outputs);
  TrainResult final_fit = train_model(config, data.train, n_inputs, n_outputs, outcome.cv.selected_rate,
                                      derive_seed(config.seed, {kFinalStream}));
  outcome.model = std::move(final_fit.model);
  outcome.epoch_loglik = std::move(final_fit.epoch_loglik);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    save_checkpoint(*out_dir / "checkpoint.json", outcome.model);
    write_training_curve(*out_dir / "training_curve.csv", outcome.epoch_loglik);
    write_cv_csv(*out_dir / "cv.csv", outcome.cv);
    save_config(*out_dir / "config.json", config);
  }
  return outcome;
}

std::vector<ResultRow> run_eval(const ModelParams& model, const ExperimentConfig& config,
                                std::span<const LabeledImage> test) {
  config.validate();
  if (test.empty()) throw ConfigError("test split is empty");
  const ModelDims expected =
      model_dims(config, static_cast<int>(test.front().pixels.size()), class_count(config));
  if (!(expected == model.dims)) {
    throw ConsistencyError("checkpoint dimensions disagree with the config");
  }
  const std::string digest = config_digest(config);
  std::vector<ResultRow> rows;
  for (Decoder decoder : config.evaluation.decoders) {
    EvalOptions opt;
    opt.decoder = decoder;
    opt.sampling = config.evaluation.sampling;
    opt.trials_per_example = config.evaluation.trials_per_example;
    opt.seed = derive_seed(config.seed, {kEvalStream});
    const EvalSummary s = evaluate(model, test, opt);
    rows.push_back(ResultRow{digest, decoder, model.dims.syn_basis, model.dims.horizon,
                             model.dims.n_outputs, s.accuracy, s.mean_ops, s.mean_decision_time,
                             s.fallback_fraction, config.seed});
  }
  return rows;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "K" || name == "k") return SweepAxis::kBasisCount;
  if (name == "T" || name == "t") return SweepAxis::kHorizon;
  throw ConfigError("sweep axis must be K or T, got '" + name + "'");
}

ExperimentConfig sweep_point_config(const ExperimentConfig& base, SweepAxis axis, int value) {
  if (value < 1) throw ConfigError("sweep values must be >= 1");
  ExperimentConfig c = base;
  if (axis == SweepAxis::kHorizon) c.model.horizon = value;
  c.model.syn_basis = value;
  c.model.fb_basis = value;
  c.seed = derive_seed(base.seed, {kSweepStream, static_cast<std::uint64_t>(axis),
                                   static_cast<std::uint64_t>(value)});
  return c;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const DatasetSplit& data,
                                 SweepAxis axis, std::span<const int> values,
                                 const std::optional<std::filesystem::path>& out_dir) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ResultRow> rows;
  for (int v : values) {
    const ExperimentConfig point = sweep_point_config(config, axis, v);
    std::optional<std::filesystem::path> point_dir;
    if (out_dir) {
      point_dir = *out_dir / ((axis == SweepAxis::kBasisCount ? "K_" : "T_") + std::to_string(v));
    }
    const TrainOutcome trained = run_train(point, data, point_dir);
    const std::vector<ResultRow> point_rows = run_eval(trained.model, point, data.test);
    rows.insert(rows.end(), point_rows.begin(), point_rows.end());
  }
  return rows;
}

// CSV ----------------------------------------------------------------------

namespace {

constexpr const char* kResultColumns[] = {"config_digest", "decoder",           "K",
                                          "T",             "N_Y",               "accuracy",
                                          "mean_ops",      "mean_decision_time", "fallback_fraction",
                                          "seed"};
constexpr std::size_t kResultColumnCount = std::size(kResultColumns);

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string result_csv_header() {
  std::string h;
  for (std::size_t k = 0; k < kResultColumnCount; ++k) {
    if (k) h += ',';
    h += kResultColumns[k];
  }
  return h;
}

std::string to_csv_line(const ResultRow& r) {
  std::string line = r.config_digest;
  line += ',' + to_string(r.decoder);
  line += ',' + std::to_string(r.basis_count);
  line += ',' + std::to_string(r.horizon);
  line += ',' + std::to_string(r.n_outputs);
  line += ',' + format_double(r.accuracy);
  line += ',' + format_double(r.mean_ops);
  line += ',' + format_double(r.mean_decision_time);
  line += ',' + format_double(r.fallback_fraction);
  line += ',' + std::to_string(r.seed);
  return line;
}

void append_results_csv(const std::filesystem::path& path, std::span<const ResultRow> rows) {
  bool need_header = true;
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (first != result_csv_header()) {
      throw FormatError("existing results file " + path.string() + " has a different header");
    }
    need_header = false;
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  if (need_header) out << result_csv_header() << '\n';
  for (const ResultRow& r : rows) out << to_csv_line(r) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != result_csv_header()) {
    throw FormatError("results file " + path.string() + " has a missing or wrong header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != kResultColumnCount) {
      throw FormatError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(kResultColumnCount));
    }
    try {
      ResultRow r;
      r.config_digest = cells[0];
      r.decoder = decoder_from_string(cells[1]);
      r.basis_count = std::stoi(cells[2]);
      r.horizon = std::stoi(cells[3]);
      r.n_outputs = std::stoi(cells[4]);
      r.accuracy = std::stod(cells[5]);
      r.mean_ops = std::stod(cells[6]);
      r.mean_decision_time = std::stod(cells[7]);
      r.fallback_fraction = std::stod(cells[8]);
      r.seed = std::stoull(cells[9]);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

void write_training_curve(const std::filesystem::path& path, std::span<const double> epoch_loglik) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,mean_loglik\n";
  for (std::size_t e = 0; e < epoch_loglik.size(); ++e) {
    out << (e + 1) << ',' << format_double(epoch_loglik[e]) << '\n';
  }
}

}  // namespace glmsnn
