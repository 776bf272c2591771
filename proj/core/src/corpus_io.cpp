// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/corpus_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

using nlohmann::json;

constexpr const char* kSplits[] = {"train", "valid", "test"};

json domain_to_json(const DomainSpec& d) {
  return json{{"name", d.name},
              {"lines", d.lines},
              {"min_len", d.min_len},
              {"max_len", d.max_len},
              {"term_prob", d.term_prob},
              {"numeral_prob", d.numeral_prob},
              {"transform", to_string(d.transform)},
              {"generic", d.generic}};
}

DomainSpec domain_from_json(const json& j) {
  DomainSpec d;
  d.name = j.at("name").get<std::string>();
  d.lines = j.value("lines", d.lines);
  d.min_len = j.value("min_len", d.min_len);
  d.max_len = j.value("max_len", d.max_len);
  d.term_prob = j.value("term_prob", d.term_prob);
  d.numeral_prob = j.value("numeral_prob", d.numeral_prob);
  d.transform = parse_domain_transform(j.value("transform", std::string("none")));
  d.generic = j.value("generic", d.generic);
  return d;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const MultiParallelCorpus& split_of(const DomainSplit& s, int which) {
  return which == 0 ? s.train : which == 1 ? s.valid : s.test;
}

}  // namespace

std::string manifest_to_json(const CorpusManifest& m) {
  json domains = json::array();
  for (const auto& d : m.domains) domains.push_back(domain_to_json(d));
  json j{{"seed", m.seed},
         {"languages", m.languages},
         {"domains", domains},
         {"general_concepts", m.general_concepts},
         {"terms_per_domain", m.terms_per_domain},
         {"numerals", m.numerals},
         {"marker_period", m.marker_period},
         {"successors", m.successors},
         {"valid_size", m.valid_size},
         {"test_size", m.test_size}};
  return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
    CorpusManifest m = default_manifest();
    m.seed = j.value("seed", m.seed);
    if (j.contains("languages")) m.languages = j.at("languages").get<std::vector<std::string>>();
    if (j.contains("domains")) {
      m.domains.clear();
      for (const auto& d : j.at("domains")) m.domains.push_back(domain_from_json(d));
    }
    m.general_concepts = j.value("general_concepts", m.general_concepts);
    m.terms_per_domain = j.value("terms_per_domain", m.terms_per_domain);
    m.numerals = j.value("numerals", m.numerals);
    m.marker_period = j.value("marker_period", m.marker_period);
    m.successors = j.value("successors", m.successors);
    m.valid_size = j.value("valid_size", m.valid_size);
    m.test_size = j.value("test_size", m.test_size);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

CorpusManifest load_manifest(const std::filesystem::path& path) { return manifest_from_json(read_file(path)); }

CorpusBundle generate_corpus(const CorpusManifest& manifest) {
  manifest.validate();
  CorpusBundle b;
  b.manifest = manifest;
  b.vocab = std::make_shared<const Vocabulary>(manifest.lexicon());
  b.splits = make_splits(generate_multiparallel(*b.vocab, manifest), manifest.valid_size, manifest.test_size,
                         manifest.seed);
  return b;
}

void write_corpus(const std::filesystem::path& root, const CorpusBundle& bundle) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  {
    std::ofstream out(root / "manifest.json", std::ios::binary);
    out << manifest_to_json(bundle.manifest);
    if (!out) throw CorpusError("cannot write manifest under " + root.string());
  }
  const Vocabulary& vocab = *bundle.vocab;
  for (int s = 0; s < 3; ++s) {
    for (const auto& [domain, split] : bundle.splits.domains) {
      const auto& corpus = split_of(split, s);
      const fs::path dir = root / kSplits[s] / domain;
      fs::create_directories(dir);
      for (const auto& lang : corpus.languages) {
        if (lang == "en") continue;
        std::ofstream out(dir / ("en-" + lang + ".tsv"), std::ios::binary);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          out << corpus.pivot_ids[i] << '\t' << vocab.detokenize(corpus.sentence("en", i)) << '\t'
              << vocab.detokenize(corpus.sentence(lang, i)) << '\n';
        }
        if (!out) throw CorpusError("cannot write " + (dir / ("en-" + lang + ".tsv")).string());
      }
    }
  }
}

CorpusBundle load_corpus(const std::filesystem::path& root) {
  CorpusBundle b;
  b.manifest = load_manifest(root / "manifest.json");
  b.vocab = std::make_shared<const Vocabulary>(b.manifest.lexicon());
  const Vocabulary& vocab = *b.vocab;
  for (const auto& spec : b.manifest.domains) {
    DomainSplit split;
    for (int s = 0; s < 3; ++s) {
      MultiParallelCorpus corpus;
      corpus.domain = spec.name;
      corpus.languages = b.manifest.languages;
      bool have_english = false;
      for (const auto& lang : b.manifest.languages) {
        if (lang == "en") continue;
        const auto path = root / kSplits[s] / spec.name / ("en-" + lang + ".tsv");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("missing corpus file " + path.string());
        std::vector<std::int64_t> ids;
        std::vector<std::vector<int>> english;
        std::vector<std::vector<int>> other;
        std::string line;
        while (std::getline(in, line)) {
          const auto t1 = line.find('\t');
          const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
          if (t2 == std::string::npos) throw FormatError("malformed line in " + path.string());
          try {
            ids.push_back(std::stoll(line.substr(0, t1)));
          } catch (const std::exception&) {
            throw FormatError("bad pivot id in " + path.string());
          }
          english.push_back(vocab.tokenize(std::string_view(line).substr(t1 + 1, t2 - t1 - 1)));
          other.push_back(vocab.tokenize(std::string_view(line).substr(t2 + 1)));
        }
        if (!have_english) {
          corpus.pivot_ids = ids;
          corpus.text["en"] = std::move(english);
          have_english = true;
        } else if (ids != corpus.pivot_ids) {
          throw FormatError("pivot ids of " + path.string() + " do not align with the other languages");
        }
        corpus.text[lang] = std::move(other);
      }
      if (s == 0) split.train = std::move(corpus);
      if (s == 1) split.valid = std::move(corpus);
      if (s == 2) split.test = std::move(corpus);
    }
    for (std::int64_t id : split.valid.pivot_ids) split.held_out.insert(id);
    for (std::int64_t id : split.test.pivot_ids) split.held_out.insert(id);
    b.splits.domains.emplace(spec.name, std::move(split));
  }
  return b;
}

}  // namespace adapterforge
