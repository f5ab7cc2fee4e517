#include "xling/json_io.hpp"

namespace xling {

JsonFields::JsonFields(const Json& object, std::string where)
    : object_(object), where_(std::move(where)) {
  if (!object_.is_object()) throw FormatError(where_ + ": expected a JSON object");
}

const Json& JsonFields::at(const std::string& key) {
  seen_.insert(key);
  return object_.at(key);
}

void JsonFields::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!seen_.contains(key)) throw FormatError(where_ + ": unknown key '" + key + "'");
  }
}

namespace {

template <class FromName>
auto enum_field(JsonFields& f, const std::string& key, std::string_view fallback_name,
                FromName from_name) {
  const auto name = f.get<std::string>(key, std::string(fallback_name));
  try {
    return from_name(name);
  } catch (const Error& e) {
    throw FormatError(f.path(key) + ": " + e.what());
  }
}

}  // namespace

Json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate}, {"batch", cfg.batch},
          {"dropout", cfg.dropout},             {"patience", cfg.patience},
          {"max_epochs", cfg.max_epochs},       {"seed", cfg.seed},
          {"monitor", monitor_name(cfg.monitor)}, {"restore_best", cfg.restore_best}};
}

TrainConfig train_config_from_json(const Json& j, const std::string& where) {
  JsonFields f(j, where);
  TrainConfig cfg;
  cfg.learning_rate = f.get("learning_rate", cfg.learning_rate);
  cfg.batch = f.get("batch", cfg.batch);
  cfg.dropout = f.get("dropout", cfg.dropout);
  cfg.patience = f.get("patience", cfg.patience);
  cfg.max_epochs = f.get("max_epochs", cfg.max_epochs);
  cfg.seed = f.get("seed", cfg.seed);
  cfg.monitor = enum_field(f, "monitor", monitor_name(cfg.monitor), monitor_from_name);
  cfg.restore_best = f.get("restore_best", cfg.restore_best);
  f.finish();
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw FormatError(where + ": " + e.what());
  }
  return cfg;
}

Json to_json(const ModelSpec& s) {
  return {{"max_len", s.max_len},
          {"filters", s.filters},
          {"dense", s.dense},
          {"hidden1", s.hidden1},
          {"hidden2", s.hidden2},
          {"conv_activation", nn::activation_name(s.conv_activation)},
          {"variant", nn::variant_name(s.variant)},
          {"lstm_bias", s.lstm_bias},
          {"reduction", nn::reduction_name(s.reduction)},
          {"padding", s.padding == PaddingPolicy::Kind::zero ? "zero" : "noise"},
          {"pad_sigma", s.pad_sigma}};
}

ModelSpec model_spec_from_json(const Json& j, const std::string& where) {
  JsonFields f(j, where);
  ModelSpec s;
  s.max_len = f.get("max_len", s.max_len);
  s.filters = f.get("filters", s.filters);
  s.dense = f.get("dense", s.dense);
  s.hidden1 = f.get("hidden1", s.hidden1);
  s.hidden2 = f.get("hidden2", s.hidden2);
  s.conv_activation = enum_field(f, "conv_activation",
                                 nn::activation_name(s.conv_activation), nn::activation_from_name);
  s.variant = enum_field(f, "variant", nn::variant_name(s.variant), nn::variant_from_name);
  s.lstm_bias = f.get("lstm_bias", s.lstm_bias);
  s.reduction = enum_field(f, "reduction", nn::reduction_name(s.reduction),
                           nn::reduction_from_name);
  const auto padding = f.get<std::string>("padding", "noise");
  if (padding == "noise") {
    s.padding = PaddingPolicy::Kind::gaussian_noise;
  } else if (padding == "zero") {
    s.padding = PaddingPolicy::Kind::zero;
  } else {
    throw FormatError(f.path("padding") + ": expected noise or zero");
  }
  s.pad_sigma = f.get("pad_sigma", s.pad_sigma);
  f.finish();
  if (s.max_len == 0 || s.filters == 0 || s.dense == 0 || s.hidden1 == 0 || s.hidden2 == 0) {
    throw FormatError(where + ": model sizes must be positive");
  }
  if (!(s.pad_sigma >= 0.0)) throw FormatError(where + ": pad_sigma must be non-negative");
  return s;
}

Json to_json(const ScenarioSpec& s) {
  return {{"label", s.label()},
          {"kind", scenario_kind_name(s.kind)},
          {"source", s.source},
          {"target", s.target},
          {"model", nn::model_kind_name(s.model)},
          {"test_language", s.test_language},
          {"dataset", s.dataset}};
}

ScenarioSpec scenario_from_json(const Json& j, const std::string& where) {
  JsonFields f(j, where);
  ScenarioSpec s;
  s.kind = scenario_kind_from_name(f.require<std::string>("kind"));
  s.source = f.require<std::string>("source");
  s.target = f.get<std::string>("target", "");
  s.model = enum_field(f, "model", nn::model_kind_name(s.model), nn::model_kind_from_name);
  s.test_language = f.get<std::string>("test_language", s.source);
  s.dataset = f.get<std::string>("dataset", s.dataset);
  if (f.has("label")) {
    const auto label = f.get<std::string>("label", "");
    if (label != s.label()) {
      throw FormatError(f.path("label") + ": '" + label + "' does not match the scenario ('" +
                        s.label() + "')");
    }
  }
  f.finish();
  try {
    s.validate();
  } catch (const Error& e) {
    throw FormatError(where + ": " + e.what());
  }
  return s;
}

Json to_json(const AlignHyper& h) {
  return {{"k_neighbors", h.k_neighbors},
          {"learning_rate", h.learning_rate},
          {"epochs", h.epochs},
          {"batch", h.batch},
          {"neighbor_pool", h.neighbor_pool}};
}

AlignHyper align_hyper_from_json(const Json& j, const std::string& where) {
  JsonFields f(j, where);
  AlignHyper h;
  h.k_neighbors = f.get("k_neighbors", h.k_neighbors);
  h.learning_rate = f.get("learning_rate", h.learning_rate);
  h.epochs = f.get("epochs", h.epochs);
  h.batch = f.get("batch", h.batch);
  h.neighbor_pool = f.get("neighbor_pool", h.neighbor_pool);
  f.finish();
  if (h.k_neighbors == 0) throw FormatError(where + ": k_neighbors must be at least 1");
  return h;
}

}  // namespace xling
