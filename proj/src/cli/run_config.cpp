#include <fstream>
#include <set>
#include <sstream>

#include "xling/cli.hpp"
#include "xling/error.hpp"
#include "xling/rng.hpp"

namespace xling::cli {

namespace {

std::filesystem::path existing(const std::filesystem::path& base, const std::string& p,
                               const std::string& where) {
  std::filesystem::path full = std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base / p;
  if (!std::filesystem::exists(full)) throw FormatError(where + ": file not found: " + full.string());
  return full;
}

std::vector<ScenarioSpec> parse_scenarios(const Json& list, const std::string& dataset) {
  if (!list.is_array() || list.empty()) {
    throw FormatError("config.scenarios: expected a non-empty array");
  }
  std::vector<ScenarioSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "config.scenarios[" + std::to_string(i) + "]";
    const Json& item = list[i];
    if (item.is_object() && item.contains("matrix")) {
      JsonFields outer(item, where);
      JsonFields f(outer.at("matrix"), where + ".matrix");
      outer.finish();
      const auto langs = f.require<std::vector<std::string>>("languages");
      if (langs.size() != 2) throw FormatError(where + ".matrix.languages: expected two languages");
      const auto common = f.get<std::string>("common", langs[0]);
      const auto test = f.get<std::string>("bilingual_test", langs[1]);
      const auto models = f.get<std::vector<std::string>>("models", {"cnn", "rnn"});
      f.finish();
      for (const auto& m : models) {
        nn::ModelKind kind;
        try {
          kind = nn::model_kind_from_name(m);
        } catch (const Error& e) {
          throw FormatError(where + ".matrix.models: " + e.what());
        }
        try {
          for (auto& s : scenario_matrix(langs[0], langs[1], common, test, kind, dataset)) {
            out.push_back(std::move(s));
          }
        } catch (const Error& e) {
          throw FormatError(where + ".matrix: " + e.what());
        }
      }
      continue;
    }
    Json copy = item;
    if (copy.is_object() && !copy.contains("dataset")) copy["dataset"] = dataset;
    out.push_back(scenario_from_json(copy, where));
  }
  return out;
}

}  // namespace

RunConfig parse_run_config(const Json& doc, const std::filesystem::path& base_dir) {
  JsonFields f(doc, "config");
  RunConfig cfg;
  cfg.seed = f.get<std::uint64_t>("seed", 0);
  cfg.output = base_dir / f.require<std::string>("output");
  cfg.dataset = f.get<std::string>("dataset", cfg.dataset);
  cfg.record_timing = f.get("record_timing", false);
  cfg.save_checkpoints = f.get("save_checkpoints", false);

  {
    const Json& e = f.at("embeddings");
    if (!e.is_object() || e.empty()) throw FormatError("config.embeddings: expected language -> path");
    for (const auto& [lang, path] : e.items()) {
      if (!path.is_string()) throw FormatError("config.embeddings." + lang + ": expected a path");
      cfg.embeddings[lang] = existing(base_dir, path.get<std::string>(), "config.embeddings." + lang);
    }
  }

  if (f.has("dictionaries")) {
    const Json& list = f.at("dictionaries");
    if (!list.is_array()) throw FormatError("config.dictionaries: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "config.dictionaries[" + std::to_string(i) + "]";
      JsonFields d(list[i], where);
      DictionarySource src;
      src.source = d.require<std::string>("source");
      src.target = d.require<std::string>("target");
      src.path = existing(base_dir, d.require<std::string>("path"), where + ".path");
      d.finish();
      cfg.dictionaries.push_back(std::move(src));
    }
  }

  {
    const Json& c = f.at("corpora");
    if (!c.is_object() || c.empty()) throw FormatError("config.corpora: expected language -> files");
    for (const auto& [lang, entry] : c.items()) {
      const std::string where = "config.corpora." + lang;
      CorpusSource src;
      if (entry.is_string()) {
        src.path = existing(base_dir, entry.get<std::string>(), where);
      } else {
        JsonFields cf(entry, where);
        if (cf.has("path")) {
          src.path = existing(base_dir, cf.require<std::string>("path"), where + ".path");
        } else {
          src.train = existing(base_dir, cf.require<std::string>("train"), where + ".train");
          src.validation =
              existing(base_dir, cf.require<std::string>("validation"), where + ".validation");
          src.test = existing(base_dir, cf.require<std::string>("test"), where + ".test");
        }
        cf.finish();
      }
      cfg.corpora[lang] = std::move(src);
    }
  }

  if (f.has("split")) {
    JsonFields s(f.at("split"), "config.split");
    cfg.split.train = s.get("train", cfg.split.train);
    cfg.split.validation = s.get("validation", cfg.split.validation);
    cfg.split.test = s.get("test", cfg.split.test);
    s.finish();
  }

  if (f.has("translator")) {
    JsonFields t(f.at("translator"), "config.translator");
    cfg.translator.kind = t.get<std::string>("kind", "lexicon");
    if (cfg.translator.kind == "lexicon") {
      try {
        cfg.translator.oov = oov_policy_from_name(t.get<std::string>("oov", "keep"));
      } catch (const Error& e) {
        throw FormatError(std::string("config.translator.oov: ") + e.what());
      }
    } else if (cfg.translator.kind == "external") {
      auto& ep = cfg.translator.endpoint;
      ep.url = t.require<std::string>("url");
      ep.token_env = t.get<std::string>("token_env", "");
      ep.batch_size = t.get("batch_size", ep.batch_size);
      ep.max_retries = t.get("max_retries", ep.max_retries);
      ep.backoff_ms = t.get("backoff_ms", ep.backoff_ms);
      ep.max_in_flight = t.get("max_in_flight", ep.max_in_flight);
      ep.timeout_seconds = t.get("timeout_seconds", ep.timeout_seconds);
      if (ep.batch_size == 0 || ep.max_in_flight == 0) {
        throw FormatError("config.translator: batch_size and max_in_flight must be at least 1");
      }
    } else {
      throw FormatError("config.translator.kind: expected lexicon or external");
    }
    t.finish();
  }

  if (f.has("alignment")) {
    Json a = f.at("alignment");
    if (!a.is_object()) throw FormatError("config.alignment: expected an object");
    if (a.contains("method")) {
      try {
        cfg.align_method = method_from_name(a["method"].get<std::string>());
      } catch (const std::exception& e) {
        throw FormatError(std::string("config.alignment.method: ") + e.what());
      }
      a.erase("method");
    }
    cfg.align = align_hyper_from_json(a, "config.alignment");
  }

  if (f.has("model")) cfg.model = model_spec_from_json(f.at("model"), "config.model");
  if (f.has("training")) {
    const Json& tj = f.at("training");
    if (tj.is_object() && tj.contains("seed")) {
      throw FormatError("config.training: unknown key 'seed' (the seed is set at top level)");
    }
    cfg.training = train_config_from_json(tj, "config.training");
  }
  cfg.training.seed = cfg.seed;
  cfg.scenarios = parse_scenarios(f.at("scenarios"), cfg.dataset);
  f.finish();

  // Cross-checks that only need the config itself.
  for (const auto& s : cfg.scenarios) {
    for (const auto* lang : {&s.source, &s.target, &s.test_language}) {
      if (lang->empty()) continue;
      if (!cfg.embeddings.contains(*lang)) {
        throw FormatError("config.scenarios: no embeddings for language '" + *lang + "'");
      }
    }
    for (const auto* lang : {&s.source, &s.test_language}) {
      if (!cfg.corpora.contains(*lang)) {
        throw FormatError("config.scenarios: no corpus for language '" + *lang + "'");
      }
    }
    if ((s.kind == ScenarioKind::bilingual_translated || s.kind == ScenarioKind::bilingual_aligned) &&
        !cfg.corpora.contains(s.target)) {
      throw FormatError("config.scenarios: no corpus for language '" + s.target + "'");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

namespace {

const DictionarySource* find_dictionary(const RunConfig& cfg, const std::string& from,
                                        const std::string& to, bool& inverted) {
  for (const auto& d : cfg.dictionaries) {
    if (d.source == from && d.target == to) {
      inverted = false;
      return &d;
    }
  }
  for (const auto& d : cfg.dictionaries) {
    if (d.source == to && d.target == from) {
      inverted = true;
      return &d;
    }
  }
  return nullptr;
}

SeedDictionary dictionary_for(const RunConfig& cfg, const std::string& from, const std::string& to) {
  bool inverted = false;
  const DictionarySource* src = find_dictionary(cfg, from, to, inverted);
  if (src == nullptr) {
    throw FormatError("no dictionary between '" + from + "' and '" + to + "'");
  }
  SeedDictionary dict = load_dictionary(src->path);
  if (!inverted) return dict;
  SeedDictionary flipped;
  flipped.provenance = dict.provenance + " (inverted)";
  for (const auto& [s, t] : dict.pairs) flipped.add(t, s);
  return flipped;
}

}  // namespace

LoadedInputs prepare_inputs(const RunConfig& cfg) {
  LoadedInputs loaded;
  std::set<std::string> languages;
  for (const auto& s : cfg.scenarios) {
    languages.insert(s.source);
    if (!s.target.empty()) languages.insert(s.target);
  }
  for (const auto& lang : languages) {
    loaded.spaces.emplace(lang, normalize(load_vec(cfg.embeddings.at(lang), lang)));
  }
  for (const auto& [lang, space] : loaded.spaces) loaded.inputs.spaces[lang] = &space;

  for (const auto& [lang, src] : cfg.corpora) {
    if (!languages.contains(lang)) continue;
    LanguageData data;
    if (!src.path.empty()) {
      SplitSpec split = cfg.split;
      split.seed = derive_seed(cfg.seed, "split", tag_hash(lang));
      auto parts = stratified_split(read_corpus(src.path, lang), split);
      data = {std::move(parts.train), std::move(parts.validation), std::move(parts.test)};
    } else {
      data = {read_corpus(src.train, lang), read_corpus(src.validation, lang),
              read_corpus(src.test, lang)};
    }
    loaded.inputs.corpora[lang] = std::move(data);
  }

  for (const auto& s : cfg.scenarios) {
    const bool translated =
        s.kind == ScenarioKind::mono_translated || s.kind == ScenarioKind::bilingual_translated;
    const bool aligned =
        s.kind == ScenarioKind::mono_aligned || s.kind == ScenarioKind::bilingual_aligned;
    if (translated && !loaded.inputs.translators.contains({s.source, s.target})) {
      TranslatorSpec spec;
      if (cfg.translator.kind == "lexicon") {
        spec.kind = LexiconTranslator{
            BilingualLexicon::from_dictionary(dictionary_for(cfg, s.source, s.target), s.source,
                                              s.target),
            cfg.translator.oov};
      } else {
        ExternalEndpointConfig ep = cfg.translator.endpoint;
        ep.source_language = s.source;
        ep.target_language = s.target;
        std::filesystem::create_directories(cfg.output / "translation-cache");
        ep.cache_path = cfg.output / "translation-cache" / (s.source + "-" + s.target + ".tsv");
        spec.kind = ep;
      }
      loaded.inputs.translators.emplace(std::pair{s.source, s.target}, std::move(spec));
    }
    if (aligned && s.source != s.target && !loaded.inputs.maps.contains({s.source, s.target})) {
      const SeedDictionary dict = dictionary_for(cfg, s.source, s.target);
      const EmbeddingSpace& from = loaded.spaces.at(s.source);
      const EmbeddingSpace& to = loaded.spaces.at(s.target);
      AlignmentMap map = fit_procrustes(from, to, dict);
      if (cfg.align_method == AlignMethod::rcsls) map = fit_rcsls(from, to, dict, map, cfg.align);
      loaded.inputs.maps.emplace(std::pair{s.source, s.target}, std::move(map));
    }
  }
  return loaded;
}

std::string record_file_name(std::size_t index, const ScenarioSpec& spec) {
  std::string label;
  for (char c : spec.label()) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
    label += keep ? c : '_';
  }
  while (!label.empty() && label.back() == '_') label.pop_back();
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%02zu", index + 1);
  return std::string(prefix) + "_" + std::string(nn::model_kind_name(spec.model)) + "_" + label +
         "_on_" + spec.test_language + ".json";
}

}  // namespace xling::cli
