#include "xling/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "xling/error.hpp"
#include "xling/json_io.hpp"
#include "xling/nn/checkpoint.hpp"
#include "xling/rng.hpp"

namespace xling {

// ---------------------------------------------------------------------------
// Scenarios

std::string_view scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::mono_original: return "mono_original";
    case ScenarioKind::mono_translated: return "mono_translated";
    case ScenarioKind::mono_aligned: return "mono_aligned";
    case ScenarioKind::bilingual_translated: return "bilingual_translated";
    case ScenarioKind::bilingual_aligned: return "bilingual_aligned";
  }
  return "?";
}

ScenarioKind scenario_kind_from_name(std::string_view name) {
  for (auto k : {ScenarioKind::mono_original, ScenarioKind::mono_translated,
                 ScenarioKind::mono_aligned, ScenarioKind::bilingual_translated,
                 ScenarioKind::bilingual_aligned}) {
    if (scenario_kind_name(k) == name) return k;
  }
  throw FormatError("unknown scenario kind '" + std::string(name) + "'");
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

}  // namespace

std::string ScenarioSpec::label() const {
  switch (kind) {
    case ScenarioKind::mono_original: return upper(source);
    case ScenarioKind::mono_translated: return "T-" + upper(source);
    case ScenarioKind::mono_aligned: return "A-" + upper(source);
    case ScenarioKind::bilingual_translated:
    case ScenarioKind::bilingual_aligned: {
      auto a = upper(source), b = upper(target);
      if (b < a) std::swap(a, b);
      return std::string(kind == ScenarioKind::bilingual_translated ? "Translated(" : "Aligned(") +
             a + "+" + b + ")";
    }
  }
  return "?";
}

void ScenarioSpec::validate() const {
  if (source.empty()) throw FormatError("scenario source language is empty");
  switch (kind) {
    case ScenarioKind::mono_original:
      if (!target.empty() && target != source) {
        throw FormatError("mono_original takes no target language");
      }
      break;
    case ScenarioKind::mono_translated:
      if (target.empty() || target == source) {
        throw FormatError("mono_translated needs a target language different from the source");
      }
      break;
    case ScenarioKind::mono_aligned:
      if (target.empty()) throw FormatError("mono_aligned needs a common-space language");
      break;
    case ScenarioKind::bilingual_translated:
    case ScenarioKind::bilingual_aligned:
      if (target.empty() || target == source) {
        throw FormatError("bilingual scenarios need two different languages");
      }
      if (test_language != source && test_language != target) {
        throw FormatError("bilingual test language must be one of the two training languages");
      }
      return;
  }
  if (test_language != source) {
    throw FormatError("monolingual scenarios test on their source language");
  }
}

std::vector<ScenarioSpec> scenario_matrix(const std::string& a, const std::string& b,
                                          const std::string& common,
                                          const std::string& bilingual_test, nn::ModelKind model,
                                          const std::string& dataset) {
  if (a == b) throw FormatError("scenario matrix needs two different languages");
  if (common != a && common != b) throw FormatError("common space must be one of the languages");
  if (bilingual_test != a && bilingual_test != b) {
    throw FormatError("bilingual test language must be one of the languages");
  }
  const std::string other = bilingual_test == a ? b : a;
  std::vector<ScenarioSpec> out{
      {ScenarioKind::mono_original, a, "", model, a, dataset},
      {ScenarioKind::mono_original, b, "", model, b, dataset},
      {ScenarioKind::mono_translated, a, b, model, a, dataset},
      {ScenarioKind::mono_translated, b, a, model, b, dataset},
      {ScenarioKind::mono_aligned, a, common, model, a, dataset},
      {ScenarioKind::mono_aligned, b, common, model, b, dataset},
      // The test language's documents are translated into the other language.
      {ScenarioKind::bilingual_translated, bilingual_test, other, model, bilingual_test, dataset},
      {ScenarioKind::bilingual_aligned, common == a ? b : a, common, model, bilingual_test,
       dataset},
  };
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

std::string_view monitor_name(Monitor m) {
  switch (m) {
    case Monitor::val_loss: return "val_loss";
    case Monitor::val_f1: return "val_f1";
    case Monitor::val_map: return "val_map";
  }
  return "?";
}

Monitor monitor_from_name(std::string_view name) {
  for (auto m : {Monitor::val_loss, Monitor::val_f1, Monitor::val_map}) {
    if (monitor_name(m) == name) return m;
  }
  throw FormatError("unknown monitor '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch == 0) throw FormatError("batch must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw FormatError("learning_rate must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw FormatError("dropout must be in [0, 1)");
}

TrainOutcome run_training(TrainableModel& model, const TrainConfig& cfg) {
  cfg.validate();
  TrainOutcome out;
  const bool lower_is_better = cfg.monitor == Monitor::val_loss;
  double best = lower_is_better ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double train_loss = model.train_epoch(epoch);
    const ValidationResult v = model.validate();
    const double value = cfg.monitor == Monitor::val_loss ? v.loss
                         : cfg.monitor == Monitor::val_f1 ? v.f1
                                                          : v.map;
    if (!std::isfinite(value)) {
      throw NumericError("monitor is not finite at epoch " + std::to_string(epoch));
    }
    out.history.push_back({epoch, train_loss, v.loss, value});
    out.stopped_epoch = epoch;
    const bool improved = lower_is_better ? value <= best - kMinImprovement
                                          : value >= best + kMinImprovement;
    if (improved) {
      best = value;
      out.best_epoch = epoch;
      since_best = 0;
      if (cfg.restore_best) model.snapshot();
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (cfg.restore_best && out.best_epoch != 0 && out.best_epoch != out.stopped_epoch) {
    model.restore();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Networks

nn::ModelParams make_model(nn::ModelKind kind, const ModelSpec& spec, std::size_t embed_dim,
                           std::size_t classes, double dropout, std::uint64_t seed) {
  if (kind == nn::ModelKind::cnn) {
    nn::CnnConfig c;
    c.embed_dim = embed_dim;
    c.max_len = spec.max_len;
    c.filters = spec.filters;
    c.dense = spec.dense;
    c.classes = classes;
    c.conv_activation = spec.conv_activation;
    c.dropout = dropout;
    return nn::init_cnn(c, seed);
  }
  nn::RnnConfig c;
  c.embed_dim = embed_dim;
  c.max_len = spec.max_len;
  c.hidden1 = spec.hidden1;
  c.hidden2 = spec.hidden2;
  c.dense = spec.dense;
  c.classes = classes;
  c.variant = spec.variant;
  c.lstm_bias = spec.lstm_bias;
  c.reduction = spec.reduction;
  c.dropout = dropout;
  return nn::init_rnn(c, seed);
}

EncodedSet encode_corpus(const Corpus& corpus, const EmbeddingSpace& space,
                         const LabelEncoder& encoder, std::size_t max_len, const ModelSpec& spec,
                         std::uint64_t pad_seed) {
  EncodedSet set;
  set.inputs.reserve(corpus.size());
  set.labels.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    const auto tokens = truncate_tokens(tokenize(corpus.docs[i].text), max_len);
    const PaddingPolicy policy = spec.padding == PaddingPolicy::Kind::zero
                                     ? PaddingPolicy::zero()
                                     : PaddingPolicy::noise(spec.pad_sigma, derive_seed(pad_seed, "doc", i));
    auto embedded = embed_sequence(space, tokens, max_len, policy);
    set.inputs.push_back(std::move(embedded.matrix));
    set.oov_tokens += embedded.oov_count;
    set.labels.push_back(encoder.encode(corpus.docs[i].label));
  }
  return set;
}

namespace {

void check_set(const nn::ModelParams& params, const EncodedSet& set, const char* what) {
  const std::size_t len = nn::max_len(params), dim = nn::embed_dim(params);
  const std::size_t classes = nn::num_classes(params);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.inputs[i].rows() != len || set.inputs[i].cols() != dim) {
      throw FormatError(std::string(what) + " sample " + std::to_string(i) + " has shape " +
                        set.inputs[i].shape_string() + ", model expects " + std::to_string(len) +
                        "x" + std::to_string(dim));
    }
    if (set.labels[i] >= classes) {
      throw FormatError(std::string(what) + " sample " + std::to_string(i) +
                        " has a class index beyond the model's " + std::to_string(classes));
    }
  }
}

}  // namespace

NetworkTrainer::NetworkTrainer(nn::ModelParams init, const EncodedSet& train,
                               const EncodedSet& validation, const TrainConfig& cfg)
    : params_(std::move(init)),
      best_(params_),
      train_(train),
      validation_(validation),
      cfg_(cfg),
      adam_(nn::AdamState::for_params(params_)) {
  check_set(params_, train_, "training");
  check_set(params_, validation_, "validation");
}

double NetworkTrainer::train_epoch(std::size_t epoch) {
  if (train_.size() == 0) throw FormatError("training set is empty");
  std::vector<std::size_t> order(train_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler(derive_seed(cfg_.seed, "shuffle", epoch));
  shuffler.shuffle(std::span<std::size_t>(order));

  const std::uint64_t epoch_seed = derive_seed(cfg_.seed, "dropout", epoch);
  double loss_sum = 0.0;
  std::vector<nn::Sample> batch;
  for (std::size_t lo = 0, b = 0; lo < order.size(); lo += cfg_.batch, ++b) {
    const std::size_t hi = std::min(order.size(), lo + cfg_.batch);
    batch.clear();
    for (std::size_t k = lo; k < hi; ++k) {
      batch.push_back({&train_.inputs[order[k]], train_.labels[order[k]]});
    }
    auto grad = nn::backward(params_, batch, nn::Mode::train, derive_seed(epoch_seed, "batch", b));
    nn::adam_step(params_, grad.gradients, adam_, cfg_.learning_rate);
    loss_sum += grad.mean_loss * static_cast<double>(batch.size());
  }
  return loss_sum / static_cast<double>(train_.size());
}

ValidationResult NetworkTrainer::validate() {
  if (validation_.size() == 0) throw FormatError("validation set is empty");
  const auto probs = predict(params_, validation_);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    loss += nn::cross_entropy_loss(probs[i], validation_.labels[i]);
  }
  const auto report = compute_metrics(probs, validation_.labels, nn::num_classes(params_));
  return {loss / static_cast<double>(probs.size()), report.weighted_f1, report.map};
}

void NetworkTrainer::snapshot() { best_ = params_; }
void NetworkTrainer::restore() { params_ = best_; }

TrainResult train(const nn::ModelParams& init, const EncodedSet& train_set,
                  const EncodedSet& validation_set, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.max_epochs == 0) return {init, {}};
  NetworkTrainer trainer(init, train_set, validation_set, cfg);
  TrainOutcome outcome = run_training(trainer, cfg);
  return {trainer.params(), std::move(outcome)};
}

std::vector<std::vector<double>> predict(const nn::ModelParams& params, const EncodedSet& set) {
  check_set(params, set, "prediction");
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  for (const auto& x : set.inputs) out.push_back(nn::forward(x, params, nn::Mode::eval, 0));
  return out;
}

MetricsReport evaluate(const nn::ModelParams& params, const EncodedSet& test_set) {
  if (test_set.size() == 0) throw FormatError("test set is empty");
  return compute_metrics(predict(params, test_set), test_set.labels, nn::num_classes(params));
}

double mean_loss(const nn::ModelParams& params, const EncodedSet& set) {
  if (set.size() == 0) throw FormatError("cannot compute a loss on an empty set");
  const auto probs = predict(params, set);
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) loss += nn::cross_entropy_loss(probs[i], set.labels[i]);
  return loss / static_cast<double>(probs.size());
}

// ---------------------------------------------------------------------------
// Scenario assembly

LabelEncoder scenario_labels(const ScenarioInputs& inputs) {
  std::vector<const Corpus*> all;
  for (const auto& [lang, data] : inputs.corpora) all.push_back(&data.train);
  return LabelEncoder::fit(all);
}

namespace {

/// A language's splits as the scenario sees them, plus the space to embed them in.
struct Represented {
  LanguageData data;
  EmbeddingSpace owned;  // aligned spaces are built per run
  const EmbeddingSpace* space = nullptr;
};

const LanguageData& corpus_of(const ScenarioInputs& in, const std::string& lang) {
  auto it = in.corpora.find(lang);
  if (it == in.corpora.end()) throw FormatError("no corpus for language '" + lang + "'");
  return it->second;
}

const EmbeddingSpace& space_of(const ScenarioInputs& in, const std::string& lang) {
  auto it = in.spaces.find(lang);
  if (it == in.spaces.end() || it->second == nullptr) {
    throw FormatError("no embedding space for language '" + lang + "'");
  }
  return *it->second;
}

Represented translated(const ScenarioInputs& in, const std::string& from, const std::string& to) {
  auto it = in.translators.find({from, to});
  if (it == in.translators.end()) {
    throw FormatError("no translator from '" + from + "' to '" + to + "'");
  }
  const LanguageData& src = corpus_of(in, from);
  Represented r;
  r.data = {translate_corpus(src.train, it->second), translate_corpus(src.validation, it->second),
            translate_corpus(src.test, it->second)};
  r.space = &space_of(in, to);
  return r;
}

Represented native(const ScenarioInputs& in, const std::string& lang) {
  Represented r;
  r.data = corpus_of(in, lang);
  r.space = &space_of(in, lang);
  return r;
}

Represented aligned(const ScenarioInputs& in, const std::string& lang, const std::string& common) {
  if (lang == common) return native(in, lang);
  auto it = in.maps.find({lang, common});
  if (it == in.maps.end()) {
    throw FormatError("no alignment map from '" + lang + "' to '" + common + "'");
  }
  Represented r;
  r.data = corpus_of(in, lang);
  r.owned = normalize(apply_map(space_of(in, lang), it->second));
  return r;
}

const EmbeddingSpace& space_ref(const Represented& r) { return r.space ? *r.space : r.owned; }

EncodedSet concat(EncodedSet a, EncodedSet b) {
  for (auto& x : b.inputs) a.inputs.push_back(std::move(x));
  a.labels.insert(a.labels.end(), b.labels.begin(), b.labels.end());
  a.oov_tokens += b.oov_tokens;
  return a;
}

}  // namespace

RunRecord run_scenario(const ScenarioSpec& spec, const ScenarioInputs& inputs,
                       const ModelSpec& model, const TrainConfig& cfg, const RunOptions& options) {
  spec.validate();
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const LabelEncoder encoder = scenario_labels(inputs);
  const std::uint64_t seed = cfg.seed;

  auto encode = [&](const Corpus& c, const EmbeddingSpace& space, const std::string& lang,
                    const char* split) {
    return encode_corpus(c, space, encoder, model.max_len, model,
                         derive_seed(seed, "pad", tag_hash(lang + "/" + split)));
  };

  EncodedSet train_set, val_set, test_set;
  std::size_t dim = 0;
  auto take = [&](const Represented& r, const std::string& lang, bool with_test) {
    const EmbeddingSpace& space = space_ref(r);
    if (dim != 0 && space.dim() != dim) {
      throw FormatError("scenario mixes embedding dimensions " + std::to_string(dim) + " and " +
                        std::to_string(space.dim()));
    }
    dim = space.dim();
    train_set = concat(std::move(train_set), encode(r.data.train, space, lang, "train"));
    val_set = concat(std::move(val_set), encode(r.data.validation, space, lang, "validation"));
    if (with_test) test_set = encode(r.data.test, space, lang, "test");
  };

  switch (spec.kind) {
    case ScenarioKind::mono_original:
      take(native(inputs, spec.source), spec.source, true);
      break;
    case ScenarioKind::mono_translated:
      take(translated(inputs, spec.source, spec.target), spec.source, true);
      break;
    case ScenarioKind::mono_aligned:
      take(aligned(inputs, spec.source, spec.target), spec.source, true);
      break;
    case ScenarioKind::bilingual_translated:
      take(translated(inputs, spec.source, spec.target), spec.source,
           spec.test_language == spec.source);
      take(native(inputs, spec.target), spec.target, spec.test_language == spec.target);
      break;
    case ScenarioKind::bilingual_aligned:
      take(aligned(inputs, spec.source, spec.target), spec.source,
           spec.test_language == spec.source);
      take(aligned(inputs, spec.target, spec.target), spec.target,
           spec.test_language == spec.target);
      break;
  }
  if (train_set.size() == 0 || val_set.size() == 0 || test_set.size() == 0) {
    throw FormatError("scenario " + spec.label() + " has an empty train, validation or test set");
  }

  const nn::ModelParams init =
      make_model(spec.model, model, dim, encoder.size(), cfg.dropout, derive_seed(seed, "model", 0));
  TrainResult result = train(init, train_set, val_set, cfg);

  RunRecord rec;
  rec.scenario = spec;
  rec.seed = seed;
  rec.train = cfg;
  rec.model = model;
  rec.labels = encoder.labels();
  rec.train_docs = train_set.size();
  rec.validation_docs = val_set.size();
  rec.test_docs = test_set.size();
  rec.history = result.outcome.history;
  rec.stopped_epoch = result.outcome.stopped_epoch;
  rec.metrics = evaluate(result.params, test_set);
  if (!options.checkpoint_path.empty()) {
    nn::save_checkpoint({result.params, encoder.labels()}, options.checkpoint_path);
  }
  if (options.record_timing) {
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Records

std::string format_run_record(const RunRecord& r) {
  Json scenario = to_json(r.scenario);
  scenario["train_docs"] = r.train_docs;
  scenario["validation_docs"] = r.validation_docs;
  scenario["test_docs"] = r.test_docs;

  Json history = Json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"monitor", e.monitor}});
  }
  Json per_class = Json::array();
  for (std::size_t k = 0; k < r.metrics.per_class.size(); ++k) {
    const auto& m = r.metrics.per_class[k];
    per_class.push_back({{"label", k < r.labels.size() ? r.labels[k] : std::to_string(k)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  Json metrics = {{"weighted_precision", r.metrics.weighted_precision},
                  {"weighted_recall", r.metrics.weighted_recall},
                  {"weighted_f1", r.metrics.weighted_f1},
                  {"accuracy", r.metrics.accuracy},
                  {"map", r.metrics.map},
                  {"map_skipped_classes", r.metrics.map_skipped_classes},
                  {"per_class", per_class},
                  {"confusion", r.metrics.confusion}};
  Json doc = {{"scenario", scenario},
              {"model_kind", nn::model_kind_name(r.scenario.model)},
              {"dataset", r.scenario.dataset},
              {"seed", r.seed},
              {"config", {{"training", to_json(r.train)}, {"model", to_json(r.model)}}},
              {"history", history},
              {"metrics", metrics},
              {"stopped_epoch", r.stopped_epoch},
              {"wall_seconds", r.wall_seconds ? Json(*r.wall_seconds) : Json(nullptr)}};
  return doc.dump(2) + "\n";
}

RunRecord parse_run_record(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("run record is not valid JSON: ") + e.what());
  }
  RunRecord r;
  try {
    JsonFields top(doc, "record");
    {
      Json scenario = top.require<Json>("scenario");
      r.train_docs = scenario.value("train_docs", std::size_t{0});
      r.validation_docs = scenario.value("validation_docs", std::size_t{0});
      r.test_docs = scenario.value("test_docs", std::size_t{0});
      scenario.erase("train_docs");
      scenario.erase("validation_docs");
      scenario.erase("test_docs");
      r.scenario = scenario_from_json(scenario, "record.scenario");
    }
    if (top.require<std::string>("model_kind") != nn::model_kind_name(r.scenario.model) ||
        top.require<std::string>("dataset") != r.scenario.dataset) {
      throw FormatError("record model_kind/dataset disagree with its scenario");
    }
    r.seed = top.require<std::uint64_t>("seed");
    {
      JsonFields config(top.at("config"), "record.config");
      r.train = train_config_from_json(config.at("training"), "record.config.training");
      r.model = model_spec_from_json(config.at("model"), "record.config.model");
      config.finish();
    }
    for (const auto& e : top.at("history")) {
      r.history.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                           e.at("val_loss").get<double>(), e.at("monitor").get<double>()});
    }
    const Json& m = top.at("metrics");
    r.metrics.weighted_precision = m.at("weighted_precision").get<double>();
    r.metrics.weighted_recall = m.at("weighted_recall").get<double>();
    r.metrics.weighted_f1 = m.at("weighted_f1").get<double>();
    r.metrics.accuracy = m.at("accuracy").get<double>();
    r.metrics.map = m.at("map").get<double>();
    r.metrics.map_skipped_classes = m.value("map_skipped_classes", std::vector<std::size_t>{});
    r.metrics.confusion = m.at("confusion").get<Confusion>();
    for (const auto& c : m.at("per_class")) {
      r.labels.push_back(c.at("label").get<std::string>());
      r.metrics.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                                     c.at("f1").get<double>(), c.at("support").get<std::size_t>()});
    }
    r.stopped_epoch = top.require<std::size_t>("stopped_epoch");
    const Json& wall = top.at("wall_seconds");
    if (!wall.is_null()) r.wall_seconds = wall.get<double>();
    top.finish();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

std::string column_of(const RunRecord& r) {
  return std::string(nn::model_kind_name(r.scenario.model)) + "/" + r.scenario.dataset;
}

std::string format_f1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

ComparisonTable compare_runs(std::span<const RunRecord> records) {
  if (records.empty()) throw FormatError("no run records to compare");
  ComparisonTable t;
  auto column_index = [&](const std::string& c) {
    auto it = std::find(t.columns.begin(), t.columns.end(), c);
    if (it != t.columns.end()) return static_cast<std::size_t>(it - t.columns.begin());
    t.columns.push_back(c);
    for (auto& row : t.rows) row.cells.emplace_back();
    return t.columns.size() - 1;
  };
  struct Baseline {
    std::string label;
    double f1;
  };
  std::map<std::pair<std::string, std::string>, Baseline> baselines;  // (test language, column)
  for (const auto& r : records) {
    const std::size_t col = column_index(column_of(r));
    const std::string label = r.scenario.label();
    auto row = std::find_if(t.rows.begin(), t.rows.end(), [&](const auto& x) {
      return x.test_language == r.scenario.test_language && x.label == label;
    });
    if (row == t.rows.end()) {
      t.rows.push_back({r.scenario.test_language, label, std::vector<std::optional<double>>(t.columns.size())});
      row = t.rows.end() - 1;
    }
    if (row->cells[col]) {
      throw FormatError("duplicate result for " + label + " tested on " +
                        r.scenario.test_language + " in column " + t.columns[col]);
    }
    row->cells[col] = r.metrics.weighted_f1;
    if (r.scenario.kind == ScenarioKind::mono_original) {
      baselines[{r.scenario.test_language, t.columns[col]}] = {label, r.metrics.weighted_f1};
    }
  }
  for (const auto& r : records) {
    if (r.scenario.kind == ScenarioKind::mono_original) continue;
    auto it = baselines.find({r.scenario.test_language, column_of(r)});
    if (it == baselines.end()) continue;
    Verdict v;
    v.test_language = r.scenario.test_language;
    v.column = column_of(r);
    v.baseline = it->second.label;
    v.variant = r.scenario.label();
    v.baseline_f1 = it->second.f1;
    v.variant_f1 = r.metrics.weighted_f1;
    v.outcome = v.variant_f1 > v.baseline_f1   ? "improved"
                : v.variant_f1 < v.baseline_f1 ? "degraded"
                                               : "unchanged";
    t.verdicts.push_back(std::move(v));
  }
  // group rows by test language, keeping first-appearance order
  std::vector<std::string> order;
  for (const auto& row : t.rows) {
    if (std::find(order.begin(), order.end(), row.test_language) == order.end()) order.push_back(row.test_language);
  }
  std::stable_sort(t.rows.begin(), t.rows.end(), [&](const auto& x, const auto& y) {
    return std::find(order.begin(), order.end(), x.test_language) <
           std::find(order.begin(), order.end(), y.test_language);
  });
  return t;
}

std::string format_comparison_csv(const ComparisonTable& t) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::ostringstream out;
  out << "test_language,scenario";
  for (const auto& c : t.columns) out << ',' << quote(c);
  out << '\n';
  for (const auto& row : t.rows) {
    out << quote(row.test_language) << ',' << quote(row.label);
    for (const auto& cell : row.cells) out << ',' << (cell ? format_f1(*cell) : "-");
    out << '\n';
  }
  return out.str();
}

std::string format_comparison_text(const ComparisonTable& t) {
  std::size_t label_width = 8;
  for (const auto& row : t.rows) label_width = std::max(label_width, row.label.size() + 2);
  std::ostringstream out;
  std::string last_language;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  for (const auto& row : t.rows) {
    if (row.test_language != last_language) {
      if (!last_language.empty()) out << '\n';
      out << "tested on " << row.test_language << '\n' << pad("", label_width);
      for (const auto& c : t.columns) out << pad(c, 14);
      out << '\n';
      last_language = row.test_language;
    }
    out << pad(row.label, label_width);
    for (const auto& cell : row.cells) out << pad(cell ? format_f1(*cell) : "-", 14);
    out << '\n';
  }
  if (!t.verdicts.empty()) {
    out << '\n';
    for (const auto& v : t.verdicts) {
      out << v.column << " on " << v.test_language << ": " << v.variant << " vs " << v.baseline
          << " " << format_f1(v.variant_f1) << " vs " << format_f1(v.baseline_f1) << " -> "
          << v.outcome << '\n';
    }
  }
  return out.str();
}

}  // namespace xling
