#include <doctest.h>

#include <set>

#include "synth_inputs.hpp"
#include "xling/error.hpp"
#include "xling/experiment.hpp"
#include "xling/json_io.hpp"
#include "xling/rng.hpp"

using namespace xling;

namespace {

// Replays a fixed monitor sequence; epochs past its end repeat the last value.
class ScriptedModel final : public TrainableModel {
 public:
  explicit ScriptedModel(std::vector<double> losses) : losses_(std::move(losses)) {}
  double train_epoch(std::size_t epoch) override {
    epoch_ = epoch;
    return 1.0;
  }
  ValidationResult validate() override {
    const double v = losses_[std::min(epoch_, losses_.size()) - 1];
    return {v, 1.0 - v, 1.0 - v};
  }
  void snapshot() override { snapshot_epoch = epoch_; }
  void restore() override { restored_to = snapshot_epoch; }

  std::size_t snapshot_epoch = 0;
  std::size_t restored_to = 0;

 private:
  std::vector<double> losses_;
  std::size_t epoch_ = 0;
};

RunRecord record(ScenarioKind kind, std::string source, std::string target, std::string test,
                 nn::ModelKind model, std::string dataset, double f1) {
  RunRecord r;
  r.scenario = {kind, std::move(source), std::move(target), model, std::move(test), std::move(dataset)};
  r.metrics.weighted_f1 = f1;
  return r;
}

SynthConfig tiny_world(std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  sc.dim = 8;
  sc.topic_words = 10;
  sc.neutral_words = 30;
  sc.signal_rate = 0.5;
  sc.min_length = 6;
  sc.max_length = 10;
  sc.sizes_a = {30, 9, 9};
  sc.sizes_b = {12, 9, 9};
  return sc;
}

ModelSpec tiny_model() {
  ModelSpec m;
  m.max_len = 10;
  m.filters = 2;
  m.dense = 4;
  m.hidden1 = 3;
  m.hidden2 = 3;
  return m;
}

}  // namespace

TEST_CASE("early stopping halts three improvements plus patience") {
  ScriptedModel model({1.0, 0.9, 0.8, 0.8, 0.8});
  TrainConfig cfg;
  auto out = run_training(model, cfg);
  CHECK(out.stopped_epoch == 8);
  CHECK(out.best_epoch == 3);
  CHECK(out.history.size() == 8);
  CHECK(model.restored_to == 3);
  CHECK(out.stopped_epoch - out.best_epoch <= cfg.patience);
}

TEST_CASE("early stopping edge cases") {
  TrainConfig cfg;
  SUBCASE("improvements below the threshold do not count") {
    ScriptedModel model({1.0, 1.0 - 5e-7, 1.0 - 9e-7});
    CHECK(run_training(model, cfg).stopped_epoch == 6);
  }
  SUBCASE("max_epochs bounds the run") {
    std::vector<double> falling;
    for (int i = 0; i < 50; ++i) falling.push_back(10.0 - i);
    ScriptedModel model(falling);
    cfg.max_epochs = 12;
    auto out = run_training(model, cfg);
    CHECK(out.stopped_epoch == 12);
    CHECK(out.best_epoch == 12);
  }
  SUBCASE("accuracy-like monitors are maximized") {
    cfg.monitor = Monitor::val_f1;
    ScriptedModel model({0.5, 0.4, 0.6, 0.6});  // f1 = 0.5, 0.6, 0.4, 0.4
    auto out = run_training(model, cfg);
    CHECK(out.best_epoch == 2);
    CHECK(out.stopped_epoch == 7);
  }
  SUBCASE("patience zero") {
    cfg.patience = 0;
    ScriptedModel model({1.0, 0.5, 0.7});
    CHECK(run_training(model, cfg).stopped_epoch == 3);
  }
  SUBCASE("non-finite monitor") {
    ScriptedModel model({1.0, NAN});
    CHECK_THROWS_AS(run_training(model, cfg), NumericError);
  }
}

TEST_CASE("early-stopping law over random monitor sequences") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> seq;
    for (int i = 0; i < 40; ++i) seq.push_back(rng.uniform());
    TrainConfig cfg;
    cfg.patience = rng.below(6);
    cfg.max_epochs = 1 + rng.below(40);
    ScriptedModel model(seq);
    auto out = run_training(model, cfg);
    CHECK(out.history.size() == out.stopped_epoch);
    CHECK(out.stopped_epoch <= cfg.max_epochs);
    if (out.stopped_epoch < cfg.max_epochs) {
      // patience 0 still needs one non-improving epoch to notice the stall
      CHECK(out.stopped_epoch - out.best_epoch == std::max<std::size_t>(cfg.patience, 1));
    }
    double best = seq[0];
    std::size_t best_epoch = 1;
    for (std::size_t e = 1; e < out.stopped_epoch; ++e) {
      if (seq[e] < best - kMinImprovement) {
        best = seq[e];
        best_epoch = e + 1;
      }
    }
    CHECK(out.best_epoch == best_epoch);
  }
}

TEST_CASE("training defaults follow the paper protocol") {
  TrainConfig cfg;
  CHECK(cfg.learning_rate == 1e-3);
  CHECK(cfg.batch == 32);
  CHECK(cfg.dropout == 0.5);
  CHECK(cfg.patience == 5);
  CHECK(cfg.max_epochs == 300);
  CHECK(cfg.monitor == Monitor::val_loss);
  CHECK(cfg.restore_best);
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), FormatError);
}

TEST_CASE("max_epochs zero returns the initial parameters") {
  auto w = make_synthetic(tiny_world(1));
  auto in = testing::make_inputs(w, false);
  auto enc = scenario_labels(in.inputs);
  auto spec = tiny_model();
  auto train_set = encode_corpus(w.corpus_a.train, *in.space_a, enc, spec.max_len, spec, 1);
  auto val_set = encode_corpus(w.corpus_a.validation, *in.space_a, enc, spec.max_len, spec, 2);
  auto init = make_model(nn::ModelKind::cnn, spec, 8, enc.size(), 0.5, 3);
  TrainConfig cfg;
  cfg.max_epochs = 0;
  auto result = train(init, train_set, val_set, cfg);
  CHECK(result.outcome.history.empty());
  CHECK(result.outcome.stopped_epoch == 0);
  auto a = nn::tensors(result.params);
  auto b = nn::tensors(init);
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(*a[t] == *b[t]);
}

TEST_CASE("scenario labels and validation") {
  ScenarioSpec s{ScenarioKind::mono_translated, "fr", "en", nn::ModelKind::rnn, "fr", "cls"};
  CHECK(s.label() == "T-FR");
  s.kind = ScenarioKind::bilingual_translated;
  CHECK(s.label() == "Translated(EN+FR)");
  s.kind = ScenarioKind::bilingual_aligned;
  CHECK(s.label() == "Aligned(EN+FR)");
  s.test_language = "de";
  CHECK_THROWS_AS(s.validate(), FormatError);
  ScenarioSpec mono{ScenarioKind::mono_original, "en", "", nn::ModelKind::cnn, "fr"};
  CHECK_THROWS_AS(mono.validate(), FormatError);
}

TEST_CASE("the scenario matrix enumerates eight distinct models") {
  auto m = scenario_matrix("en", "fr", "en", "fr", nn::ModelKind::rnn, "cls");
  REQUIRE(m.size() == 8);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& s : m) {
    CHECK_NOTHROW(s.validate());
    seen.insert({s.label(), s.test_language});
  }
  CHECK(seen.size() == 8);
  CHECK(seen.count({"Translated(EN+FR)", "fr"}) == 1);
  CHECK(seen.count({"Aligned(EN+FR)", "fr"}) == 1);
  CHECK(seen.count({"T-EN", "en"}) == 1);
  CHECK(seen.count({"A-FR", "fr"}) == 1);
}

TEST_CASE("comparison table in the layout of the paper's Table I") {
  std::vector<RunRecord> records{
      record(ScenarioKind::mono_original, "en", "", "en", nn::ModelKind::rnn, "cls", 0.7809),
      record(ScenarioKind::mono_translated, "fr", "en", "fr", nn::ModelKind::rnn, "cls", 0.8798),
      record(ScenarioKind::mono_original, "fr", "", "fr", nn::ModelKind::rnn, "cls", 0.6972)};
  auto t = compare_runs(records);
  CHECK(t.columns == std::vector<std::string>{"rnn/cls"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].label == "EN");
  CHECK(t.rows[1].label == "T-FR");
  CHECK(t.rows[2].label == "FR");
  CHECK(*t.rows[1].cells[0] == 0.8798);
  REQUIRE(t.verdicts.size() == 1);
  CHECK(t.verdicts[0].baseline == "FR");
  CHECK(t.verdicts[0].variant == "T-FR");
  CHECK(t.verdicts[0].outcome == "improved");
  CHECK(format_comparison_csv(t) ==
        "test_language,scenario,rnn/cls\nen,EN,0.7809\nfr,T-FR,0.8798\nfr,FR,0.6972\n");

  // A second column with a missing cell.
  records.push_back(record(ScenarioKind::mono_original, "en", "", "en", nn::ModelKind::cnn, "cls", 0.80));
  auto t2 = compare_runs(records);
  CHECK(t2.columns.size() == 2);
  CHECK_FALSE(t2.rows[1].cells[1].has_value());
  CHECK(format_comparison_csv(t2).find("fr,T-FR,0.8798,-") != std::string::npos);
  CHECK(format_comparison_text(t2).find("T-FR") != std::string::npos);

  records.push_back(records[0]);
  CHECK_THROWS_AS(compare_runs(records), FormatError);
  CHECK_THROWS_AS(compare_runs(std::vector<RunRecord>{}), FormatError);
  CHECK(compare_runs(std::span(records).first(1)).rows.size() == 1);
}

TEST_CASE("verdicts follow the sign of the F1 difference") {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double base = rng.uniform();
    const double variant = rng.below(5) == 0 ? base : rng.uniform();
    std::vector<RunRecord> r{
        record(ScenarioKind::mono_original, "fr", "", "fr", nn::ModelKind::cnn, "d", base),
        record(ScenarioKind::bilingual_aligned, "fr", "en", "fr", nn::ModelKind::cnn, "d", variant)};
    const auto& v = compare_runs(r).verdicts.at(0);
    const std::string want = variant > base ? "improved" : variant < base ? "degraded" : "unchanged";
    CHECK(v.outcome == want);
  }
}

TEST_CASE("run_scenario assembles the right sets") {
  auto w = make_synthetic(tiny_world(2));
  auto in = testing::make_inputs(w);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.seed = 11;
  const auto model = tiny_model();
  const auto& a = w.corpus_a;
  const auto& b = w.corpus_b;

  SUBCASE("bilingual training is the union of both training sets") {
    for (auto kind : {ScenarioKind::bilingual_aligned, ScenarioKind::bilingual_translated}) {
      ScenarioSpec s{kind, "b", "a", nn::ModelKind::cnn, "b"};
      auto r = run_scenario(s, in.inputs, model, cfg);
      CHECK(r.train_docs == a.train.size() + b.train.size());
      CHECK(r.validation_docs == a.validation.size() + b.validation.size());
      CHECK(r.test_docs == b.test.size());
      CHECK(r.history.size() == r.stopped_epoch);
    }
  }
  SUBCASE("mono scenarios use one corpus") {
    ScenarioSpec s{ScenarioKind::mono_original, "b", "", nn::ModelKind::rnn, "b"};
    ScenarioInputs only_b;
    only_b.corpora["b"] = in.inputs.corpora.at("b");
    only_b.spaces["b"] = in.inputs.spaces.at("b");
    auto r = run_scenario(s, only_b, model, cfg);
    CHECK(r.train_docs == b.train.size());
    CHECK(r.labels == w.labels);
  }
  SUBCASE("missing inputs are reported") {
    ScenarioSpec s{ScenarioKind::mono_aligned, "b", "a", nn::ModelKind::cnn, "b"};
    auto no_maps = in.inputs;
    no_maps.maps.clear();
    CHECK_THROWS_AS(run_scenario(s, no_maps, model, cfg), FormatError);
    ScenarioSpec t{ScenarioKind::mono_translated, "a", "b", nn::ModelKind::cnn, "a"};
    auto no_tr = in.inputs;
    no_tr.translators.clear();
    CHECK_THROWS_AS(run_scenario(t, no_tr, model, cfg), FormatError);
  }
  SUBCASE("records are deterministic and round-trip through JSON") {
    ScenarioSpec s{ScenarioKind::mono_translated, "b", "a", nn::ModelKind::cnn, "b", "toy"};
    auto r1 = run_scenario(s, in.inputs, model, cfg);
    auto r2 = run_scenario(s, in.inputs, model, cfg);
    const auto text = format_run_record(r1);
    CHECK(text == format_run_record(r2));
    auto parsed = parse_run_record(text);
    CHECK(format_run_record(parsed) == text);

    auto doc = Json::parse(text);
    std::set<std::string> keys;
    for (const auto& [k, v] : doc.items()) keys.insert(k);
    CHECK(keys == std::set<std::string>{"scenario", "model_kind", "dataset", "seed", "config", "history",
                                        "metrics", "stopped_epoch", "wall_seconds"});
    CHECK(doc["wall_seconds"].is_null());
    for (const auto& k : {"weighted_precision", "weighted_recall", "weighted_f1", "accuracy", "map",
                          "per_class", "confusion"}) {
      CHECK(doc["metrics"].contains(k));
    }
    const auto& m = r1.metrics;
    for (double v : {m.weighted_precision, m.weighted_recall, m.weighted_f1, m.accuracy, m.map}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < m.confusion.size(); ++i) {
      trace += m.confusion[i][i];
      std::size_t row = 0;
      for (auto c : m.confusion[i]) row += c;
      CHECK(row == m.per_class[i].support);
      total += row;
    }
    CHECK(m.accuracy == doctest::Approx(static_cast<double>(trace) / static_cast<double>(total)));
    CHECK_THROWS_AS(parse_run_record("{\"scenario\": 3}"), FormatError);
  }
}

TEST_CASE("evaluation is seed-independent and perfect predictors score 1") {
  auto w = make_synthetic(tiny_world(3));
  auto in = testing::make_inputs(w, false);
  auto enc = scenario_labels(in.inputs);
  auto spec = tiny_model();
  auto set = encode_corpus(w.corpus_a.test, *in.space_a, enc, spec.max_len, spec, 4);
  auto p = make_model(nn::ModelKind::cnn, spec, 8, enc.size(), 0.5, 5);
  CHECK(predict(p, set) == predict(p, set));
  std::vector<std::vector<double>> perfect;
  for (auto label : set.labels) {
    std::vector<double> row(enc.size(), 0.0);
    row[label] = 1.0;
    perfect.push_back(row);
  }
  auto m = compute_metrics(perfect, set.labels, enc.size());
  CHECK(m.weighted_f1 == 1.0);
  CHECK(m.weighted_precision == 1.0);
  CHECK(m.map == 1.0);
}
