// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'A', 'F', 'O', 'R', 'G', 'E', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

json config_json(const ModelConfig& c) {
  return json{{"d_model", c.d_model},     {"n_heads", c.n_heads},   {"enc_layers", c.enc_layers},
              {"dec_layers", c.dec_layers}, {"ffn_dim", c.ffn_dim},   {"vocab_size", c.vocab_size},
              {"max_len", c.max_len},     {"dropout_p", c.dropout_p}, {"tie_embeddings", c.tie_embeddings}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.enc_layers = j.at("enc_layers").get<int>();
  c.dec_layers = j.at("dec_layers").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.tie_embeddings = j.at("tie_embeddings").get<bool>();
  return c;
}

AdapterKind kind_from(const std::string& s) {
  if (s == to_string(AdapterKind::Language)) return AdapterKind::Language;
  if (s == to_string(AdapterKind::Domain)) return AdapterKind::Domain;
  throw FormatError("unknown adapter kind " + s);
}

Side side_from(const std::string& s) {
  if (s == to_string(Side::Encoder)) return Side::Encoder;
  if (s == to_string(Side::Decoder)) return Side::Decoder;
  throw FormatError("unknown side " + s);
}

bool selected(const std::set<std::string>& groups, const std::string& g) { return groups.empty() || groups.contains(g); }

struct Loaded {
  CheckpointInfo info;
  json tensors;
  std::vector<char> data;
  std::string dtype;
};

Loaded read_file(const std::filesystem::path& path, bool with_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisiteError("checkpoint " + path.string() + " does not exist");
  std::array<char, 8> magic{};
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in || magic != kMagic) throw FormatError(path.string() + " is not a checkpoint");
  if (version != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  if (header_len > (1ULL << 32)) throw FormatError("corrupt checkpoint header length");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw FormatError("truncated checkpoint header in " + path.string());
  Loaded out;
  try {
    const json j = json::parse(header);
    out.info.version = static_cast<int>(version);
    out.info.config = config_from(j.at("config"));
    out.info.settings.mode = parse_stack_mode(j.at("adapter_settings").at("mode").get<std::string>());
    out.info.settings.dadrop_p = j.at("adapter_settings").at("dadrop_p").get<double>();
    for (const auto& a : j.at("adapters")) {
      out.info.adapters.push_back({kind_from(a.at("kind").get<std::string>()), a.at("owner").get<std::string>(),
                                   side_from(a.at("side").get<std::string>()), a.at("layer").get<int>(),
                                   a.at("bottleneck").get<int>()});
    }
    out.info.metadata_json = j.at("metadata").dump();
    out.tensors = j.at("tensors");
    out.dtype = j.at("dtype").get<std::string>();
    for (const auto& t : out.tensors) out.info.groups.insert(t.at("group").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
  if (out.dtype != "f32" && out.dtype != "f64") throw FormatError("unknown checkpoint dtype " + out.dtype);
  if (with_data) {
    out.data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return out;
}

void copy_tensor(const Loaded& file, const json& entry, Parameter& p) {
  const auto shape = entry.at("shape").get<Shape>();
  if (shape != p.value.shape()) {
    throw ConfigError("checkpoint tensor " + p.name + " has shape " + to_string(shape) + ", model expects " +
                      to_string(p.value.shape()));
  }
  const auto offset = entry.at("offset").get<std::uint64_t>();
  const std::size_t n = p.value.size();
  const std::size_t width = file.dtype == "f32" ? 4 : 8;
  if (offset + n * width > file.data.size()) throw FormatError("checkpoint data truncated at " + p.name);
  const char* src = file.data.data() + offset;
  for (std::size_t i = 0; i < n; ++i) {
    if (width == 4) {
      float v;
      std::memcpy(&v, src + i * 4, 4);
      p.value.data()[i] = static_cast<real>(v);
    } else {
      double v;
      std::memcpy(&v, src + i * 8, 8);
      p.value.data()[i] = static_cast<real>(v);
    }
  }
}

}  // namespace

std::string model_config_to_json(const ModelConfig& config) { return config_json(config).dump(2); }

ModelConfig model_config_from_json(const std::string& text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const TransformerModel& model,
                     const std::set<std::string>& groups, const std::string& metadata_json) {
  const auto& store = model.params();
  for (const auto& g : groups) {
    if (!store.has_group(g)) throw ConfigError("cannot save unknown group " + g);
  }
  json tensors = json::array();
  std::uint64_t offset = 0;
  std::vector<const Parameter*> written;
  for (const Parameter* p : store.all()) {
    if (!selected(groups, p->group)) continue;
    tensors.push_back({{"name", p->name}, {"group", p->group}, {"shape", p->value.shape()}, {"offset", offset}});
    offset += p->value.size() * sizeof(real);
    written.push_back(p);
  }
  json adapters = json::array();
  for (const auto& d : model.adapter_descriptors()) {
    if (!selected(groups, adapter_group(d.kind, d.owner))) continue;
    adapters.push_back({{"kind", to_string(d.kind)},
                        {"owner", d.owner},
                        {"side", to_string(d.side)},
                        {"layer", d.layer},
                        {"bottleneck", d.bottleneck}});
  }
  json metadata;
  try {
    metadata = json::parse(metadata_json);
  } catch (const json::exception& e) {
    throw UsageError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  const json header{{"config", config_json(model.config())},
                    {"adapter_settings",
                     {{"mode", to_string(model.adapter_settings().mode)}, {"dadrop_p", model.adapter_settings().dadrop_p}}},
                    {"adapters", adapters},
                    {"tensors", tensors},
                    {"dtype", sizeof(real) == 4 ? "f32" : "f64"},
                    {"metadata", metadata}};
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const std::uint64_t len = text.size();
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const Parameter* p : written) {
      out.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(real)));
    }
    if (!out) throw FormatError("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) { return read_file(path, false).info; }

std::unique_ptr<TransformerModel> load_model(const std::filesystem::path& path) {
  const CheckpointInfo info = read_checkpoint_info(path);
  if (!info.groups.contains("base")) throw FormatError("checkpoint " + path.string() + " holds no base group");
  auto model = std::make_unique<TransformerModel>(info.config, 0);
  install_groups(*model, path);
  return model;
}

void install_groups(TransformerModel& model, const std::filesystem::path& path, const std::set<std::string>& groups) {
  const Loaded file = read_file(path, true);
  if (!(file.info.config == model.config())) {
    throw ConfigError("checkpoint " + path.string() + " was written for a different model config");
  }
  for (const auto& g : groups) {
    if (!file.info.groups.contains(g)) throw ConfigError("checkpoint " + path.string() + " holds no group " + g);
  }
  model.adapter_settings() = file.info.settings;
  for (const auto& d : file.info.adapters) {
    if (!selected(groups, adapter_group(d.kind, d.owner))) continue;
    if (model.adapter(adapter_group(d.kind, d.owner), d.side, d.layer) == nullptr) model.add_adapter(d, 0);
  }
  for (const auto& entry : file.tensors) {
    const auto group = entry.at("group").get<std::string>();
    if (!selected(groups, group)) continue;
    const auto name = entry.at("name").get<std::string>();
    Parameter* p = model.params().find(name);
    if (!p) throw ConfigError("model has no parameter " + name + " from " + path.string());
    copy_tensor(file, entry, *p);
  }
}

}  // namespace adapterforge
