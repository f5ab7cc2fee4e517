#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "xling/cli.hpp"
#include "xling/error.hpp"
#include "xling/nn/checkpoint.hpp"
#include "xling/rng.hpp"
#include "xling/synth.hpp"

namespace xling::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out.flush()) throw IoError("write failure on " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string guess_language(const std::filesystem::path& p) { return p.stem().string(); }

Json metrics_json(const MetricsReport& m, const std::vector<std::string>& labels) {
  Json per_class = Json::array();
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    per_class.push_back({{"label", k < labels.size() ? labels[k] : std::to_string(k)},
                         {"precision", m.per_class[k].precision},
                         {"recall", m.per_class[k].recall},
                         {"f1", m.per_class[k].f1},
                         {"support", m.per_class[k].support}});
  }
  return {{"weighted_precision", m.weighted_precision},
          {"weighted_recall", m.weighted_recall},
          {"weighted_f1", m.weighted_f1},
          {"accuracy", m.accuracy},
          {"map", m.map},
          {"map_skipped_classes", m.map_skipped_classes},
          {"per_class", per_class},
          {"confusion", m.confusion}};
}

// ---------------------------------------------------------------------------
// embed

int embed_info(const std::string& file, std::string language, std::ostream& out) {
  if (language.empty()) language = guess_language(file);
  const EmbeddingSpace space = load_vec(file, language);
  double min_norm = std::numeric_limits<double>::infinity(), max_norm = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    double s = 0.0;
    for (double v : space.row(i)) s += v * v;
    min_norm = std::min(min_norm, std::sqrt(s));
    max_norm = std::max(max_norm, std::sqrt(s));
  }
  if (space.size() == 0) min_norm = 0.0;
  Json j = {{"language", space.language()}, {"words", space.size()},   {"dim", space.dim()},
            {"min_norm", min_norm},         {"max_norm", max_norm}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int embed_normalize(const std::string& in, const std::string& out_path, std::string language,
                    std::ostream& out) {
  if (language.empty()) language = guess_language(in);
  const EmbeddingSpace space = normalize(load_vec(in, language));
  save_vec(space, out_path);
  out << "wrote " << space.size() << " unit vectors to " << out_path << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// align

struct AlignArgs {
  std::string source, target, dictionary, map, input, output;
  std::string source_language, target_language, method = "rcsls";
  AlignHyper hyper;
};

void load_pair(const AlignArgs& a, EmbeddingSpace& src, EmbeddingSpace& tgt) {
  src = normalize(load_vec(a.source, a.source_language.empty() ? guess_language(a.source)
                                                                : a.source_language));
  tgt = normalize(load_vec(a.target, a.target_language.empty() ? guess_language(a.target)
                                                                : a.target_language));
  if (src.dim() != tgt.dim()) {
    throw FormatError("dimension mismatch: " + std::to_string(src.dim()) + " vs " +
                      std::to_string(tgt.dim()));
  }
}

int align_fit(const AlignArgs& a, std::ostream& out) {
  EmbeddingSpace src, tgt;
  load_pair(a, src, tgt);
  const SeedDictionary dict = load_dictionary(a.dictionary);
  const AlignMethod method = method_from_name(a.method);
  AlignmentMap map = fit_procrustes(src, tgt, dict);
  if (method == AlignMethod::rcsls) map = fit_rcsls(src, tgt, dict, map, a.hyper);
  save_map(map, a.output);
  Json j = {{"method", method_name(map.method)},
            {"retained_pairs", map.report.retained_pairs},
            {"dropped_pairs", map.report.dropped_pairs},
            {"objective", map.report.objective}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int align_eval(const AlignArgs& a, std::ostream& out) {
  EmbeddingSpace src, tgt;
  load_pair(a, src, tgt);
  const AlignmentMap map = load_map(a.map);
  const SeedDictionary dict = load_dictionary(a.dictionary);
  if (dict.empty()) throw FormatError("dictionary " + a.dictionary + " is empty");
  const AlignmentQuality q =
      eval_alignment(src, tgt, map, dict, a.hyper.k_neighbors, a.hyper.neighbor_pool);
  Json j = {{"accuracy_at_1", q.accuracy_at_1},
            {"accuracy_at_5", q.accuracy_at_5},
            {"mean_csls_margin", q.mean_csls_margin},
            {"evaluated_pairs", q.evaluated_pairs}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int align_apply(const AlignArgs& a, std::ostream& out) {
  const AlignmentMap map = load_map(a.map);
  const std::string lang = a.source_language.empty() ? map.source_language : a.source_language;
  const EmbeddingSpace space = load_vec(a.input, lang);
  const EmbeddingSpace mapped = apply_map(space, map);
  save_vec(mapped, a.output);
  out << "mapped " << mapped.size() << " vectors into " << map.target_language << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// data

int data_split(const std::string& corpus_path, const std::string& language, const std::string& dir,
               SplitSpec spec, std::ostream& out) {
  const Corpus corpus = read_corpus(corpus_path, language);
  const CorpusSplit parts = stratified_split(corpus, spec);
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  write_corpus(parts.train, base / (language + ".train.tsv"));
  write_corpus(parts.validation, base / (language + ".validation.tsv"));
  write_corpus(parts.test, base / (language + ".test.tsv"));
  Json j = {{"train", parts.train.size()},
            {"validation", parts.validation.size()},
            {"test", parts.test.size()}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int data_stats(const std::string& corpus_path, const std::string& language, std::size_t max_len,
               std::ostream& out) {
  const Corpus corpus = read_corpus(corpus_path, language);
  std::size_t tokens = 0, longest = 0, truncated = 0;
  for (const auto& d : corpus.docs) {
    const std::size_t n = tokenize(d.text).size();
    tokens += n;
    longest = std::max(longest, n);
    if (n > max_len) ++truncated;
  }
  Json labels = Json::object();
  for (const auto& [label, count] : corpus.label_counts()) labels[label] = count;
  Json j = {{"language", language},
            {"docs", corpus.size()},
            {"labels", labels},
            {"mean_tokens", corpus.size() ? static_cast<double>(tokens) / static_cast<double>(corpus.size()) : 0.0},
            {"max_tokens", longest},
            {"truncated_docs", truncated},
            {"max_len", max_len}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

int data_synth(const SynthConfig& sc, const std::string& dir, std::ostream& out) {
  const SyntheticBilingual w = make_synthetic(sc);
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  const std::string& a = sc.language_a;
  const std::string& b = sc.language_b;
  save_vec(w.space_a, base / (a + ".vec"));
  save_vec(w.space_b, base / (b + ".vec"));
  std::string dict;
  for (const auto& [s, t] : w.dictionary.pairs) dict += s + "\t" + t + "\n";
  write_text(base / (a + "-" + b + ".dict.tsv"), dict);
  for (const auto* lang : {&a, &b}) {
    const LanguageData& d = *lang == a ? w.corpus_a : w.corpus_b;
    write_corpus(d.train, base / (*lang + ".train.tsv"));
    write_corpus(d.validation, base / (*lang + ".validation.tsv"));
    write_corpus(d.test, base / (*lang + ".test.tsv"));
  }
  auto split_files = [&](const std::string& lang) {
    return Json{{"train", lang + ".train.tsv"},
                {"validation", lang + ".validation.tsv"},
                {"test", lang + ".test.tsv"}};
  };
  ModelSpec model;
  model.max_len = 24;
  model.filters = 8;
  model.dense = 16;
  model.hidden1 = 16;
  model.hidden2 = 16;
  Json training = to_json(TrainConfig{});
  training.erase("seed");
  Json cfg = {
      {"seed", sc.seed},
      {"output", "run"},
      {"dataset", "synthetic"},
      {"embeddings", {{a, a + ".vec"}, {b, b + ".vec"}}},
      {"dictionaries", Json::array({{{"source", a}, {"target", b}, {"path", a + "-" + b + ".dict.tsv"}}})},
      {"corpora", {{a, split_files(a)}, {b, split_files(b)}}},
      {"translator", {{"kind", "lexicon"}, {"oov", "keep"}}},
      {"alignment", {{"method", "rcsls"}}},
      {"model", to_json(model)},
      {"training", training},
      {"scenarios",
       Json::array({{{"matrix",
                      {{"languages", {a, b}}, {"common", a}, {"bilingual_test", b}, {"models", {"cnn"}}}}}})}};
  write_text(base / "config.json", cfg.dump(2) + "\n");
  out << "wrote synthetic languages " << a << " and " << b << " to " << dir << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// translate

struct TranslateArgs {
  std::string corpus, source, target, output, lexicon, oov = "keep", endpoint, token_env, cache;
  std::size_t batch = 16, retries = 3, in_flight = 1;
  unsigned backoff_ms = 250;
};

int translate_run(const TranslateArgs& a, std::ostream& out) {
  if (a.lexicon.empty() == a.endpoint.empty()) {
    throw FormatError("give exactly one of --lexicon or --endpoint");
  }
  TranslatorSpec spec;
  if (!a.lexicon.empty()) {
    spec.kind = LexiconTranslator{
        BilingualLexicon::from_dictionary(load_dictionary(a.lexicon), a.source, a.target),
        oov_policy_from_name(a.oov)};
  } else {
    ExternalEndpointConfig ep;
    ep.url = a.endpoint;
    ep.token_env = a.token_env;
    ep.source_language = a.source;
    ep.target_language = a.target;
    ep.batch_size = a.batch;
    ep.max_retries = a.retries;
    ep.backoff_ms = a.backoff_ms;
    ep.max_in_flight = a.in_flight;
    ep.cache_path = a.cache;
    spec.kind = ep;
  }
  TranslateStats stats;
  const Corpus translated = translate_corpus(read_corpus(a.corpus, a.source), spec, &stats);
  write_corpus(translated, a.output);
  Json j = {{"docs", translated.size()},
            {"requests", stats.requests},
            {"retries", stats.retries},
            {"cache_hits", stats.cache_hits}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train / evaluate

struct TrainArgs {
  std::string train, validation, embeddings, language, model = "cnn", output, config;
  std::optional<std::uint64_t> seed;
};

int train_cmd(const TrainArgs& a, std::ostream& out) {
  ModelSpec spec;
  TrainConfig tc;
  if (!a.config.empty()) {
    const Json doc = Json::parse(read_text(a.config), nullptr, false);
    if (doc.is_discarded()) throw FormatError(a.config + ": invalid JSON");
    JsonFields f(doc, "config");
    if (f.has("model")) spec = model_spec_from_json(f.at("model"), "config.model");
    if (f.has("training")) tc = train_config_from_json(f.at("training"), "config.training");
    f.finish();
  }
  if (a.seed) tc.seed = *a.seed;
  const nn::ModelKind kind = nn::model_kind_from_name(a.model);
  const EmbeddingSpace space = normalize(load_vec(a.embeddings, a.language));
  const Corpus train_corpus = read_corpus(a.train, a.language);
  const Corpus val_corpus = read_corpus(a.validation, a.language);
  const LabelEncoder encoder = LabelEncoder::fit(train_corpus);
  const EncodedSet train_set = encode_corpus(train_corpus, space, encoder, spec.max_len, spec,
                                             derive_seed(tc.seed, "pad", tag_hash(a.language + "/train")));
  const EncodedSet val_set = encode_corpus(val_corpus, space, encoder, spec.max_len, spec,
                                           derive_seed(tc.seed, "pad", tag_hash(a.language + "/validation")));
  const nn::ModelParams init =
      make_model(kind, spec, space.dim(), encoder.size(), tc.dropout, derive_seed(tc.seed, "model", 0));
  const TrainResult result = train(init, train_set, val_set, tc);
  nn::save_checkpoint({result.params, encoder.labels()}, a.output);
  Json history = Json::array();
  for (const auto& e : result.outcome.history) {
    history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"monitor", e.monitor}});
  }
  Json j = {{"stopped_epoch", result.outcome.stopped_epoch},
            {"best_epoch", result.outcome.best_epoch},
            {"history", history}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint, corpus, embeddings, language;
  std::uint64_t seed = 0;
};

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(a.checkpoint);
  const EmbeddingSpace space = normalize(load_vec(a.embeddings, a.language));
  if (space.dim() != nn::embed_dim(ckpt.params)) {
    throw FormatError("embedding dim " + std::to_string(space.dim()) + " does not match the model's " +
                      std::to_string(nn::embed_dim(ckpt.params)));
  }
  const LabelEncoder encoder(ckpt.labels);
  ModelSpec spec;
  spec.max_len = nn::max_len(ckpt.params);
  const EncodedSet test = encode_corpus(read_corpus(a.corpus, a.language), space, encoder, spec.max_len,
                                        spec, derive_seed(a.seed, "pad", tag_hash(a.language + "/test")));
  out << metrics_json(evaluate(ckpt.params, test), ckpt.labels).dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

int experiment_run(const std::string& config_path, std::optional<std::uint64_t> seed,
                   const std::string& output, std::size_t jobs, std::ostream& out,
                   std::ostream& err) {
  RunConfig cfg = load_run_config(config_path);
  if (seed) {
    cfg.seed = *seed;
    cfg.training.seed = *seed;
  }
  if (!output.empty()) cfg.output = output;
  if (jobs == 0) throw FormatError("--jobs must be at least 1");
  std::filesystem::create_directories(cfg.output / "records");

  const LoadedInputs loaded = prepare_inputs(cfg);
  const std::size_t n = cfg.scenarios.size();
  std::vector<std::optional<RunRecord>> records(n);
  std::vector<std::string> failures(n);
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      const ScenarioSpec& spec = cfg.scenarios[i];
      RunOptions options;
      options.record_timing = cfg.record_timing;
      if (cfg.save_checkpoints) {
        auto name = record_file_name(i, spec);
        name.replace(name.size() - 5, 5, ".ckpt");
        options.checkpoint_path = (cfg.output / "checkpoints" / name).string();
        std::filesystem::create_directories(cfg.output / "checkpoints");
      }
      try {
        records[i] = run_scenario(spec, loaded.inputs, cfg.model, cfg.training, options);
        write_text(cfg.output / "records" / record_file_name(i, spec), format_run_record(*records[i]));
        std::lock_guard lock(log_mutex);
        err << "[" << i + 1 << "/" << n << "] " << nn::model_kind_name(spec.model) << " "
            << spec.label() << " on " << spec.test_language << ": weighted F1 "
            << records[i]->metrics.weighted_f1 << " after " << records[i]->stopped_epoch
            << " epochs\n";
      } catch (const std::exception& e) {
        failures[i] = e.what();
        std::lock_guard lock(log_mutex);
        err << "[" << i + 1 << "/" << n << "] " << spec.label() << " failed: " << e.what() << '\n';
      }
    }
  };
  const std::size_t threads = std::min(jobs, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<RunRecord> done;
  Json failed = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i]) {
      done.push_back(*records[i]);
    } else {
      failed.push_back({{"scenario", to_json(cfg.scenarios[i])}, {"error", failures[i]}});
    }
  }
  if (!failed.empty()) write_text(cfg.output / "failures.json", failed.dump(2) + "\n");
  if (!done.empty()) {
    const ComparisonTable table = compare_runs(done);
    write_text(cfg.output / "comparison.csv", format_comparison_csv(table));
    out << format_comparison_text(table);
  }
  return failed.empty() ? kExitOk : kExitScenarioFailed;
}

int report_cmd(const std::vector<std::string>& paths, const std::string& csv, std::ostream& out) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    const std::filesystem::path path(p);
    if (std::filesystem::is_directory(path)) {
      const auto dir = std::filesystem::is_directory(path / "records") ? path / "records" : path;
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(path)) {
      files.push_back(path);
    } else {
      throw IoError("no such file or directory: " + p);
    }
  }
  std::vector<RunRecord> records;
  for (const auto& f : files) {
    try {
      records.push_back(parse_run_record(read_text(f)));
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
  }
  const ComparisonTable table = compare_runs(records);
  if (!csv.empty()) write_text(csv, format_comparison_csv(table));
  out << format_comparison_text(table);
  return kExitOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual text classification toolkit", "xling"};
  app.require_subcommand(1);
  std::function<int()> action;

  // embed
  auto* embed = app.add_subcommand("embed", "Inspect or normalize .vec files");
  embed->require_subcommand(1);
  std::string e_file, e_out, e_lang;
  auto* e_info = embed->add_subcommand("info", "Print vocabulary size, dim and norms");
  e_info->add_option("file", e_file, ".vec file")->required();
  e_info->add_option("--language", e_lang, "Language code (default: file stem)");
  e_info->callback([&] { action = [&] { return embed_info(e_file, e_lang, out); }; });
  auto* e_norm = embed->add_subcommand("normalize", "Write a unit-normalized copy");
  e_norm->add_option("input", e_file)->required();
  e_norm->add_option("output", e_out)->required();
  e_norm->add_option("--language", e_lang);
  e_norm->callback([&] { action = [&] { return embed_normalize(e_file, e_out, e_lang, out); }; });

  // align
  auto* align = app.add_subcommand("align", "Fit, evaluate or apply embedding maps");
  align->require_subcommand(1);
  AlignArgs al;
  auto pair_options = [&](CLI::App* c) {
    c->add_option("--source", al.source, "Source .vec")->required();
    c->add_option("--target", al.target, "Target .vec")->required();
    c->add_option("--dictionary", al.dictionary, "TAB-separated word pairs")->required();
    c->add_option("--source-language", al.source_language);
    c->add_option("--target-language", al.target_language);
    c->add_option("--k", al.hyper.k_neighbors, "CSLS neighbourhood size");
    c->add_option("--neighbor-pool", al.hyper.neighbor_pool);
  };
  auto* a_fit = align->add_subcommand("fit", "Fit a map (procrustes or rcsls)");
  pair_options(a_fit);
  a_fit->add_option("--method", al.method)->check(CLI::IsMember({"procrustes", "rcsls"}));
  a_fit->add_option("--epochs", al.hyper.epochs);
  a_fit->add_option("--lr", al.hyper.learning_rate);
  a_fit->add_option("--output", al.output, "Map file to write")->required();
  a_fit->callback([&] { action = [&] { return align_fit(al, out); }; });
  auto* a_eval = align->add_subcommand("eval", "CSLS retrieval accuracy of a map");
  pair_options(a_eval);
  a_eval->add_option("--map", al.map)->required();
  a_eval->callback([&] { action = [&] { return align_eval(al, out); }; });
  auto* a_apply = align->add_subcommand("apply", "Map every vector of a .vec file");
  a_apply->add_option("--map", al.map)->required();
  a_apply->add_option("--input", al.input)->required();
  a_apply->add_option("--output", al.output)->required();
  a_apply->add_option("--language", al.source_language);
  a_apply->callback([&] { action = [&] { return align_apply(al, out); }; });

  // data
  auto* data = app.add_subcommand("data", "Corpus utilities");
  data->require_subcommand(1);
  std::string d_corpus, d_lang, d_out;
  SplitSpec d_split;
  std::size_t d_max_len = 100;
  auto* d_split_cmd = data->add_subcommand("split", "Stratified train/validation/test split");
  d_split_cmd->add_option("--corpus", d_corpus)->required();
  d_split_cmd->add_option("--language", d_lang)->required();
  d_split_cmd->add_option("--output", d_out, "Directory")->required();
  d_split_cmd->add_option("--seed", d_split.seed);
  d_split_cmd->add_option("--train", d_split.train);
  d_split_cmd->add_option("--validation", d_split.validation);
  d_split_cmd->add_option("--test", d_split.test);
  d_split_cmd->callback([&] { action = [&] { return data_split(d_corpus, d_lang, d_out, d_split, out); }; });
  auto* d_stats = data->add_subcommand("stats", "Label counts and token lengths");
  d_stats->add_option("--corpus", d_corpus)->required();
  d_stats->add_option("--language", d_lang)->required();
  d_stats->add_option("--max-len", d_max_len);
  d_stats->callback([&] { action = [&] { return data_stats(d_corpus, d_lang, d_max_len, out); }; });
  SynthConfig sc;
  auto* d_synth = data->add_subcommand("synth", "Generate a synthetic bilingual setup and config");
  d_synth->add_option("--output", d_out, "Directory")->required();
  d_synth->add_option("--seed", sc.seed);
  d_synth->add_option("--dim", sc.dim);
  d_synth->add_option("--classes", sc.classes);
  d_synth->add_option("--signal-rate", sc.signal_rate);
  d_synth->add_option("--noise", sc.rotation_noise, "Per-coordinate noise on language b");
  d_synth->add_option("--language-a", sc.language_a);
  d_synth->add_option("--language-b", sc.language_b);
  d_synth->callback([&] { action = [&] { return data_synth(sc, d_out, out); }; });

  // translate
  auto* translate = app.add_subcommand("translate", "Translate a corpus");
  translate->require_subcommand(1);
  TranslateArgs tr;
  auto* t_run = translate->add_subcommand("run", "Lexicon or HTTP translation");
  t_run->add_option("--corpus", tr.corpus)->required();
  t_run->add_option("--source", tr.source, "Source language")->required();
  t_run->add_option("--target", tr.target, "Target language")->required();
  t_run->add_option("--output", tr.output)->required();
  t_run->add_option("--lexicon", tr.lexicon, "Dictionary file (first pair per word wins)");
  t_run->add_option("--oov", tr.oov)->check(CLI::IsMember({"keep", "drop"}));
  t_run->add_option("--endpoint", tr.endpoint, "http://host:port/path");
  t_run->add_option("--token-env", tr.token_env, "Variable holding the bearer token");
  t_run->add_option("--cache", tr.cache, "Translation cache file");
  t_run->add_option("--batch-size", tr.batch);
  t_run->add_option("--retries", tr.retries);
  t_run->add_option("--backoff-ms", tr.backoff_ms);
  t_run->add_option("--in-flight", tr.in_flight);
  t_run->callback([&] { action = [&] { return translate_run(tr, out); }; });

  // train / evaluate
  TrainArgs ta;
  auto* train_app = app.add_subcommand("train", "Train one classifier and save a checkpoint");
  train_app->add_option("--train", ta.train)->required();
  train_app->add_option("--validation", ta.validation)->required();
  train_app->add_option("--embeddings", ta.embeddings)->required();
  train_app->add_option("--language", ta.language)->required();
  train_app->add_option("--model", ta.model)->check(CLI::IsMember({"cnn", "rnn"}));
  train_app->add_option("--config", ta.config, "JSON with optional model and training sections");
  train_app->add_option("--seed", ta.seed);
  train_app->add_option("--output", ta.output, "Checkpoint file")->required();
  train_app->callback([&] { action = [&] { return train_cmd(ta, out); }; });
  EvaluateArgs ev;
  auto* eval_app = app.add_subcommand("evaluate", "Score a checkpoint on a labeled corpus");
  eval_app->add_option("--checkpoint", ev.checkpoint)->required();
  eval_app->add_option("--corpus", ev.corpus)->required();
  eval_app->add_option("--embeddings", ev.embeddings)->required();
  eval_app->add_option("--language", ev.language)->required();
  eval_app->add_option("--seed", ev.seed, "Seed for padding noise");
  eval_app->callback([&] { action = [&] { return evaluate_cmd(ev, out); }; });

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run the scenario matrix");
  experiment->require_subcommand(1);
  std::string x_config, x_output;
  std::optional<std::uint64_t> x_seed;
  std::size_t x_jobs = 1;
  auto* x_run = experiment->add_subcommand("run", "Run every scenario of a config");
  x_run->add_option("--config", x_config)->required();
  x_run->add_option("--seed", x_seed, "Override the root seed");
  x_run->add_option("--output", x_output, "Override the output directory");
  x_run->add_option("--jobs", x_jobs, "Scenarios run concurrently");
  x_run->callback([&] {
    action = [&] { return experiment_run(x_config, x_seed, x_output, x_jobs, out, err); };
  });

  // report
  std::vector<std::string> r_paths;
  std::string r_csv;
  auto* report = app.add_subcommand("report", "Comparison table from saved run records");
  report->add_option("paths", r_paths, "Record files or run directories")->required();
  report->add_option("--csv", r_csv, "Also write the table as CSV");
  report->callback([&] { action = [&] { return report_cmd(r_paths, r_csv, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  if (!action) {
    err << "error: no command given\n";
    return kExitInvalid;
  }
  return guarded(action, err);
}

}  // namespace xling::cli
