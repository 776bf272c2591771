// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "adapterforge/corpus.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

/// A generated or loaded corpus: manifest, lexicon and splits together.
struct CorpusBundle {
  CorpusManifest manifest;
  std::shared_ptr<const Vocabulary> vocab;
  SplitSet splits;
};

std::string manifest_to_json(const CorpusManifest& manifest);
/// Missing keys take default_manifest() values. Throws ConfigError.
CorpusManifest manifest_from_json(const std::string& text);
CorpusManifest load_manifest(const std::filesystem::path& path);

/// Generates corpora and splits in memory.
CorpusBundle generate_corpus(const CorpusManifest& manifest);

/// Writes <root>/manifest.json and <root>/<split>/<domain>/en-<xx>.tsv with
/// lines "pivot_id<TAB>english<TAB>xx". Every other direction is recovered by
/// joining on pivot ids. Output bytes depend only on the manifest.
void write_corpus(const std::filesystem::path& root, const CorpusBundle& bundle);

/// Inverse of write_corpus. Throws FormatError / CorpusError on bad files.
CorpusBundle load_corpus(const std::filesystem::path& root);

}  // namespace adapterforge
