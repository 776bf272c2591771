// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "adapterforge/transformer.hpp"

namespace adapterforge {

/// Header of a checkpoint file.
struct CheckpointInfo {
  int version = 0;
  ModelConfig config;
  AdapterSettings settings;
  std::vector<AdapterDescriptor> adapters;
  std::set<std::string> groups;
  std::string metadata_json = "{}";
};

/// Binary container: 8-byte magic, u32 version, u64 header length, JSON
/// header, then raw little-endian tensor data. Only the listed groups are
/// written (all when empty). Written to a temporary file and renamed into
/// place.
void save_checkpoint(const std::filesystem::path& path, const TransformerModel& model,
                     const std::set<std::string>& groups = {}, const std::string& metadata_json = "{}");

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

/// Rebuilds a model from a checkpoint that holds the "base" group.
std::unique_ptr<TransformerModel> load_model(const std::filesystem::path& path);

/// Copies the listed groups (all when empty) into an existing model,
/// installing adapters the model lacks. A different model config is a
/// ConfigError, as is a requested group the file does not hold.
void install_groups(TransformerModel& model, const std::filesystem::path& path,
                    const std::set<std::string>& groups = {});

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace adapterforge
