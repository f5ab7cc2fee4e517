#include "xling/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "xling/error.hpp"

namespace xling::nn {

namespace {

constexpr std::string_view kMagic = "xling-checkpoint 1";

nlohmann::json config_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using P = std::decay_t<decltype(p)>;
        const auto& c = p.config;
        if constexpr (std::is_same_v<P, CnnParams>) {
          return {{"embed_dim", c.embed_dim}, {"max_len", c.max_len},
                  {"filters", c.filters},     {"dense", c.dense},
                  {"classes", c.classes},     {"conv_activation", activation_name(c.conv_activation)},
                  {"dropout", c.dropout}};
        } else {
          return {{"embed_dim", c.embed_dim}, {"max_len", c.max_len},
                  {"hidden1", c.hidden1},     {"hidden2", c.hidden2},
                  {"dense", c.dense},         {"classes", c.classes},
                  {"variant", variant_name(c.variant)},
                  {"lstm_bias", c.lstm_bias}, {"reduction", reduction_name(c.reduction)},
                  {"dropout", c.dropout}};
        }
      },
      params);
}

ModelParams params_from_json(const nlohmann::json& header) {
  const ModelKind kind = model_kind_from_name(header.at("kind").get<std::string>());
  const auto& c = header.at("config");
  if (kind == ModelKind::cnn) {
    CnnConfig cfg;
    cfg.embed_dim = c.at("embed_dim");
    cfg.max_len = c.at("max_len");
    cfg.filters = c.at("filters");
    cfg.dense = c.at("dense");
    cfg.classes = c.at("classes");
    cfg.conv_activation = activation_from_name(c.at("conv_activation").get<std::string>());
    cfg.dropout = c.at("dropout");
    return init_cnn(cfg, 0);
  }
  RnnConfig cfg;
  cfg.embed_dim = c.at("embed_dim");
  cfg.max_len = c.at("max_len");
  cfg.hidden1 = c.at("hidden1");
  cfg.hidden2 = c.at("hidden2");
  cfg.dense = c.at("dense");
  cfg.classes = c.at("classes");
  cfg.variant = variant_from_name(c.at("variant").get<std::string>());
  cfg.lstm_bias = c.at("lstm_bias");
  cfg.reduction = reduction_from_name(c.at("reduction").get<std::string>());
  cfg.dropout = c.at("dropout");
  return init_rnn(cfg, 0);
}

void write_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

bool read_le(std::istream& in, double& v) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  nlohmann::json header;
  header["kind"] = model_kind_name(kind_of(checkpoint.params));
  header["config"] = config_json(checkpoint.params);
  header["labels"] = checkpoint.labels;
  nlohmann::json list = nlohmann::json::array();
  for_each_tensor(checkpoint.params, [&](std::string_view name, const Tensor& t) {
    list.push_back({{"name", name}, {"shape", t.shape()}});
  });
  header["tensors"] = list;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kMagic << '\n' << header.dump() << '\n';
  for (const Tensor* t : tensors(checkpoint.params)) {
    for (double v : t->values()) write_le(out, v);
  }
  if (!out.flush()) throw IoError("write failure on " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelParams>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic, header_line;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw FormatError(path.string() + ": not an xling checkpoint");
  }
  if (!std::getline(in, header_line)) throw FormatError(path.string() + ": truncated header");
  nlohmann::json header;
  Checkpoint cp;
  try {
    header = nlohmann::json::parse(header_line);
    cp.params = params_from_json(header);
    cp.labels = header.at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint header: " + e.what());
  }
  if (cp.labels.size() != num_classes(cp.params)) {
    throw FormatError(path.string() + ": label count does not match class count");
  }
  if (expected) {
    if (kind_of(*expected) != kind_of(cp.params) ||
        config_json(*expected) != config_json(cp.params)) {
      throw FormatError(path.string() + ": checkpoint dims " + config_json(cp.params).dump() +
                        " do not match expected " + config_json(*expected).dump());
    }
  }
  // Declared tensor list must match the structure implied by the config.
  const auto& declared = header.at("tensors");
  std::size_t idx = 0;
  bool ok = declared.is_array();
  for_each_tensor(cp.params, [&](std::string_view name, const Tensor& t) {
    if (!ok || idx >= declared.size()) {
      ok = false;
      return;
    }
    const auto& d = declared[idx++];
    ok = d.at("name").get<std::string>() == name &&
         d.at("shape").get<std::vector<std::size_t>>() == t.shape();
  });
  if (!ok || idx != declared.size()) {
    throw FormatError(path.string() + ": tensor list does not match the model config");
  }
  for (Tensor* t : tensors(cp.params)) {
    for (double& v : t->values()) {
      if (!read_le(in, v)) throw FormatError(path.string() + ": truncated tensor data");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after tensor data");
  }
  return cp;
}

}  // namespace xling::nn
