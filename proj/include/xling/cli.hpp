#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xling/align.hpp"
#include "xling/data.hpp"
#include "xling/experiment.hpp"
#include "xling/json_io.hpp"
#include "xling/translate.hpp"

namespace xling::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitScenarioFailed = 3;

/// Entry point shared by the `xling` binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CorpusSource {
  std::filesystem::path path;  // whole corpus, split with the run seed
  std::filesystem::path train, validation, test;
};

struct DictionarySource {
  std::string source;
  std::string target;
  std::filesystem::path path;
};

struct TranslatorSettings {
  std::string kind = "lexicon";  // lexicon | external
  OovPolicy oov = OovPolicy::keep;
  ExternalEndpointConfig endpoint;  // languages and cache path are filled per direction
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output;
  std::string dataset = "default";
  std::map<std::string, std::filesystem::path> embeddings;
  std::vector<DictionarySource> dictionaries;
  std::map<std::string, CorpusSource> corpora;
  SplitSpec split;
  TranslatorSettings translator;
  AlignMethod align_method = AlignMethod::rcsls;
  AlignHyper align;
  ModelSpec model;
  TrainConfig training;
  std::vector<ScenarioSpec> scenarios;
  bool record_timing = false;
  bool save_checkpoints = false;
};

/// Strict parse: unknown keys and missing files are FormatErrors. Relative
/// paths resolve against `base_dir`.
RunConfig parse_run_config(const Json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads every input a run needs (spaces, splits, maps, translators).
/// Move-only: `inputs.spaces` points into `spaces`.
struct LoadedInputs {
  std::map<std::string, EmbeddingSpace> spaces;
  ScenarioInputs inputs;

  LoadedInputs() = default;
  LoadedInputs(LoadedInputs&&) = default;
  LoadedInputs& operator=(LoadedInputs&&) = default;
  LoadedInputs(const LoadedInputs&) = delete;
  LoadedInputs& operator=(const LoadedInputs&) = delete;
};
LoadedInputs prepare_inputs(const RunConfig& cfg);

/// File name used for a scenario's record inside `<output>/records`.
std::string record_file_name(std::size_t index, const ScenarioSpec& spec);

}  // namespace xling::cli
