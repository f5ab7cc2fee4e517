#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/align.hpp"
#include "xling/data.hpp"
#include "xling/embedstore.hpp"
#include "xling/metrics.hpp"
#include "xling/nn/adam.hpp"
#include "xling/nn/model.hpp"
#include "xling/translate.hpp"

namespace xling {

enum class ScenarioKind {
  mono_original,
  mono_translated,
  mono_aligned,
  bilingual_translated,
  bilingual_aligned,
};
std::string_view scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(std::string_view name);

/// Which data trains the model and which space it lives in.
///
///   mono_original        source data, source space
///   mono_translated      source data translated into `target`, target space
///   mono_aligned         source data in the common space `target`
///   bilingual_translated source + target data; source translated into `target`
///   bilingual_aligned    source + target data in the common space `target`
///
/// Test documents come from `test_language` and are represented the same way
/// as that language's training data.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::mono_original;
  std::string source;
  std::string target;
  nn::ModelKind model = nn::ModelKind::cnn;
  std::string test_language;
  std::string dataset = "default";

  /// "FR", "T-FR", "A-FR", "Translated(EN+FR)", "Aligned(EN+FR)".
  std::string label() const;
  /// Checks language roles; throws FormatError.
  void validate() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// The eight models of the scenario matrix for languages a and b:
/// M_a, M_b, T-a (a->b), T-b (b->a), A-a, A-b (common space `common`),
/// Translated(a+b) and Aligned(a+b), both tested on `bilingual_test`.
/// Translated(a+b) translates the test language into the other language.
std::vector<ScenarioSpec> scenario_matrix(const std::string& a, const std::string& b,
                                          const std::string& common,
                                          const std::string& bilingual_test, nn::ModelKind model,
                                          const std::string& dataset = "default");

enum class Monitor { val_loss, val_f1, val_map };
std::string_view monitor_name(Monitor m);
Monitor monitor_from_name(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch = 32;
  double dropout = 0.5;
  std::size_t patience = 5;
  std::size_t max_epochs = 300;
  std::uint64_t seed = 0;
  Monitor monitor = Monitor::val_loss;
  bool restore_best = true;

  void validate() const;
};

/// Minimum change that counts as an improvement of the monitor.
inline constexpr double kMinImprovement = 1e-6;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double monitor = 0.0;
};

struct ValidationResult {
  double loss = 0.0;
  double f1 = 0.0;
  double map = 0.0;
};

/// What the training loop drives. The network implementation is below;
/// tests substitute scripted stubs.
class TrainableModel {
 public:
  virtual ~TrainableModel() = default;
  /// One pass over the training data; returns the mean training loss.
  virtual double train_epoch(std::size_t epoch) = 0;
  virtual ValidationResult validate() = 0;
  /// Remember the current parameters as the best seen.
  virtual void snapshot() = 0;
  /// Go back to the last snapshot.
  virtual void restore() = 0;
};

struct TrainOutcome {
  std::vector<EpochRecord> history;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
};

/// Early-stopping loop: stops once the monitor has failed to improve by
/// kMinImprovement for `patience` consecutive epochs, or at max_epochs.
TrainOutcome run_training(TrainableModel& model, const TrainConfig& cfg);

/// Documents embedded into one representation space.
struct EncodedSet {
  std::vector<Tensor> inputs;  // max_len x dim each
  std::vector<std::size_t> labels;
  std::size_t oov_tokens = 0;
  std::size_t size() const { return labels.size(); }
};

struct ModelSpec {
  std::size_t max_len = 100;
  std::size_t filters = 100;
  std::size_t dense = 128;
  std::size_t hidden1 = 128;
  std::size_t hidden2 = 128;
  nn::Activation conv_activation = nn::Activation::relu;
  nn::LstmVariant variant = nn::LstmVariant::standard;
  bool lstm_bias = false;
  nn::SequenceReduction reduction = nn::SequenceReduction::final_state;
  PaddingPolicy::Kind padding = PaddingPolicy::Kind::gaussian_noise;
  double pad_sigma = 0.1;
};

/// Fresh parameters for `kind` sized from the spec, the embedding dim and the
/// class count; the dropout rate comes from the training config.
nn::ModelParams make_model(nn::ModelKind kind, const ModelSpec& spec, std::size_t embed_dim,
                           std::size_t classes, double dropout, std::uint64_t seed);

/// Tokenize, truncate and embed every document. Pad/OOV noise for document i
/// is seeded from (pad_seed, i).
EncodedSet encode_corpus(const Corpus& corpus, const EmbeddingSpace& space,
                         const LabelEncoder& encoder, std::size_t max_len,
                         const ModelSpec& spec, std::uint64_t pad_seed);

/// Trains a network with Adam on mini-batches.
class NetworkTrainer final : public TrainableModel {
 public:
  NetworkTrainer(nn::ModelParams init, const EncodedSet& train, const EncodedSet& validation,
                 const TrainConfig& cfg);

  double train_epoch(std::size_t epoch) override;
  ValidationResult validate() override;
  void snapshot() override;
  void restore() override;

  const nn::ModelParams& params() const { return params_; }

 private:
  nn::ModelParams params_;
  nn::ModelParams best_;
  const EncodedSet& train_;
  const EncodedSet& validation_;
  TrainConfig cfg_;
  nn::AdamState adam_;
};

struct TrainResult {
  nn::ModelParams params;
  TrainOutcome outcome;
};

TrainResult train(const nn::ModelParams& init, const EncodedSet& train_set,
                  const EncodedSet& validation_set, const TrainConfig& cfg);

/// Class probabilities in eval mode (no dropout).
std::vector<std::vector<double>> predict(const nn::ModelParams& params, const EncodedSet& set);

MetricsReport evaluate(const nn::ModelParams& params, const EncodedSet& test_set);

/// Mean clamped cross-entropy in eval mode.
double mean_loss(const nn::ModelParams& params, const EncodedSet& set);

struct LanguageData {
  Corpus train;
  Corpus validation;
  Corpus test;
};

/// Everything a scenario may need. Spaces should be unit-normalized.
struct ScenarioInputs {
  std::map<std::string, LanguageData> corpora;
  std::map<std::string, const EmbeddingSpace*> spaces;
  std::map<std::pair<std::string, std::string>, AlignmentMap> maps;         // (from, to)
  std::map<std::pair<std::string, std::string>, TranslatorSpec> translators;  // (from, to)
};

struct RunRecord {
  ScenarioSpec scenario;
  std::uint64_t seed = 0;
  TrainConfig train;
  ModelSpec model;
  std::vector<std::string> labels;  // class index -> label
  std::size_t train_docs = 0;
  std::size_t validation_docs = 0;
  std::size_t test_docs = 0;
  std::vector<EpochRecord> history;
  MetricsReport metrics;
  std::size_t stopped_epoch = 0;
  std::optional<double> wall_seconds;
};

struct RunOptions {
  bool record_timing = false;
  /// Where the trained model goes; empty = not saved.
  std::string checkpoint_path;
};

/// Assembles the scenario's sets, trains from a seed-derived init and
/// evaluates on the test language.
RunRecord run_scenario(const ScenarioSpec& spec, const ScenarioInputs& inputs,
                       const ModelSpec& model, const TrainConfig& cfg,
                       const RunOptions& options = {});

/// Labels fit on the training sets of every language in `inputs`.
LabelEncoder scenario_labels(const ScenarioInputs& inputs);

std::string format_run_record(const RunRecord& record);
RunRecord parse_run_record(std::string_view json_text);

struct Verdict {
  std::string test_language;
  std::string column;  // "<model>/<dataset>"
  std::string baseline;
  std::string variant;
  double baseline_f1 = 0.0;
  double variant_f1 = 0.0;
  std::string outcome;  // improved | degraded | unchanged
};

struct ComparisonTable {
  std::vector<std::string> columns;
  struct Row {
    std::string test_language;
    std::string label;
    std::vector<std::optional<double>> cells;
  };
  std::vector<Row> rows;
  std::vector<Verdict> verdicts;
};

/// Weighted-F1 table with one row per (test language, scenario label) and
/// one column per (model, dataset). Every non-original scenario is compared
/// against the original scenario of the same test language and column.
ComparisonTable compare_runs(std::span<const RunRecord> records);

std::string format_comparison_csv(const ComparisonTable& table);
std::string format_comparison_text(const ComparisonTable& table);

}  // namespace xling
