#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xling/nn/model.hpp"

namespace xling::nn {

struct Checkpoint {
  ModelParams params;
  std::vector<std::string> labels;  // class index -> label
};

// Layout: the line "xling-checkpoint 1", one line of JSON describing the model
// (kind, config, labels, tensor names and shapes), then every tensor's values
// as little-endian IEEE-754 doubles in visitation order.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Loads a checkpoint. When `expected` is given, its kind and config must
/// match the stored ones exactly.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelParams>& expected = std::nullopt);

}  // namespace xling::nn
