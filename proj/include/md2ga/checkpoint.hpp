#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "md2ga/io.hpp"
#include "md2ga/model.hpp"

namespace md2ga {

inline nlohmann::json model_config_json(const ModelConfig& cfg) {
  return nlohmann::json{
      {"joints", cfg.joints},
      {"dims", cfg.dims},
      {"t_p", cfg.t_p},
      {"t_f", cfg.t_f},
      {"num_decoders", cfg.num_decoders},
      {"mode", mode_name(cfg.mode)},
      {"encoder", encoder_name(cfg.encoder)},
      {"embed_hidden", cfg.embed_hidden},
      {"embed_width", cfg.embed_width},
      {"encoder_blocks", cfg.encoder_blocks},
      {"head_hidden", cfg.head_hidden},
      {"gate_hidden", cfg.gate_hidden},
      {"seed", cfg.seed},
  };
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.joints = j.at("joints").get<int>();
  cfg.dims = j.at("dims").get<int>();
  cfg.t_p = j.at("t_p").get<int>();
  cfg.t_f = j.at("t_f").get<int>();
  cfg.num_decoders = j.at("num_decoders").get<int>();
  cfg.mode = parse_mode(j.at("mode").get<std::string>());
  cfg.encoder = parse_encoder(j.at("encoder").get<std::string>());
  cfg.embed_hidden = j.at("embed_hidden").get<int>();
  cfg.embed_width = j.at("embed_width").get<int>();
  cfg.encoder_blocks = j.at("encoder_blocks").get<int>();
  cfg.head_hidden = j.at("head_hidden").get<int>();
  cfg.gate_hidden = j.at("gate_hidden").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

// Versioned JSON checkpoint: full config plus every parameter array.  JSON
// numbers use shortest-round-trip formatting, so values reload bit-exactly.
inline void save_checkpoint(const Model& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = model_config_json(m.config);
  j["schedule"] = {{"lengths", m.schedule.lengths},
                   {"segment_starts", m.schedule.segment_starts}};
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : m.named_params()) {
    params[name] = {{"shape", t.shape()},
                    {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  j["params"] = std::move(params);
  write_file_atomic(path, j.dump() + "\n");
}

inline Model load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("bad checkpoint " + path.string() + ": " + e.what());
  }
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("checkpoint " + path.string() +
                             ": unsupported format_version");
  Model m = build_model(model_config_from_json(j.at("config")));
  const auto& params = j.at("params");
  for (auto& [name, t] : m.named_params()) {
    if (!params.contains(name))
      throw std::runtime_error("checkpoint " + path.string() + ": missing '" + name + "'");
    const auto& entry = params.at(name);
    if (entry.at("shape").get<std::vector<int>>() != t.shape())
      throw std::runtime_error("checkpoint " + path.string() + ": shape mismatch for '" +
                               name + "'");
    const auto values = entry.at("values").get<std::vector<double>>();
    if (values.size() != t.size())
      throw std::runtime_error("checkpoint " + path.string() + ": size mismatch for '" +
                               name + "'");
    std::copy(values.begin(), values.end(), t.values_mut().begin());
  }
  if (params.size() != m.named_params().size())
    throw std::runtime_error("checkpoint " + path.string() +
                             ": unexpected extra parameter entries");
  return m;
}

}  // namespace md2ga
