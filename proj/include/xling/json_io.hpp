#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "xling/error.hpp"
#include "xling/experiment.hpp"

namespace xling {

using Json = nlohmann::json;

/// Reads an object's members by name and rejects any member never asked for.
class JsonFields {
 public:
  JsonFields(const Json& object, std::string where);

  bool has(const std::string& key) const { return object_.contains(key); }
  const Json& at(const std::string& key);

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!object_.contains(key)) {
      seen_.insert(key);
      return fallback;
    }
    return convert<T>(at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!object_.contains(key)) throw FormatError(where_ + ": missing key '" + key + "'");
    return convert<T>(at(key), key);
  }

  /// Throws FormatError naming the first unknown key.
  void finish() const;
  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  template <class T>
  T convert(const Json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw FormatError(path(key) + ": wrong value type");
    }
  }

  const Json& object_;
  std::string where_;
  std::set<std::string> seen_;
};

Json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j, const std::string& where);

Json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& j, const std::string& where);

Json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const Json& j, const std::string& where);

Json to_json(const AlignHyper& hyper);
AlignHyper align_hyper_from_json(const Json& j, const std::string& where);

}  // namespace xling
