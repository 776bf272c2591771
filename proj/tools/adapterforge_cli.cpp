// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI/CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "adapterforge/corpus_io.hpp"
#include "adapterforge/errors.hpp"
#include "adapterforge/evaluation.hpp"
#include "adapterforge/experiment.hpp"

namespace fs = std::filesystem;
using namespace adapterforge;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfig = 2;
constexpr int kMissing = 3;
constexpr int kNumeric = 4;

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string millions(std::int64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fM", static_cast<double>(n) / 1e6);
  return buf;
}

int cmd_generate(const std::string& manifest_path, const fs::path& data) {
  const CorpusManifest manifest = manifest_path.empty() ? default_manifest() : load_manifest(manifest_path);
  const CorpusBundle bundle = generate_corpus(manifest);
  write_corpus(data, bundle);
  std::cout << "wrote " << manifest.languages.size() << " languages x " << manifest.domains.size() << " domains to "
            << data.string() << '\n';
  return kOk;
}

int cmd_presets() {
  std::cout << "id\tkind\tinit_from\tfull_shape_trainable\ttitle\n";
  for (const auto& p : presets()) {
    std::cout << p.id << '\t' << to_string(p.kind) << '\t' << (p.init_from.empty() ? "-" : p.init_from) << '\t'
              << (p.kind == StageKind::BackTranslate ? "-" : millions(full_shape_trainable(p))) << '\t' << p.title
              << '\n';
  }
  return kOk;
}

struct RunArgs {
  std::string preset;
  fs::path data;
  fs::path out;
  std::uint64_t seed = 1;
  std::string settings;
  std::string device = "none";
  std::string scale = "desk";
};

int cmd_run(const RunArgs& a) {
  const Preset& preset = find_preset(a.preset);
  if (a.scale == "paper-shape-count-only") {
    std::cout << preset.id << '\t' << full_shape_trainable(preset) << '\t' << millions(full_shape_trainable(preset))
              << '\n';
    return kOk;
  }
  if (a.data.empty() || a.out.empty()) throw ConfigError("run needs --data and --out");
  RunSettings settings;
  if (!a.settings.empty()) settings = run_settings_from_json(read_file(a.settings));
  settings.seed = a.seed;
  settings.out_dir = a.out;
  const CorpusBundle corpus = load_corpus(a.data);
  const RunOutcome outcome = run_preset(preset, settings, corpus);
  std::cout << "preset " << preset.id << " -> " << outcome.dir.string() << '\n';
  for (const auto& r : outcome.reports) {
    std::cout << r.domain;
    for (const auto& [group, means] : r.groups) {
      std::cout << "  " << group << " " << format_cell(means.bleu, means.on_target);
    }
    std::cout << '\n';
  }
  return kOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string metric = "bleu";
  std::string baseline;
  std::string domain;
  std::string csv;
};

int cmd_report(const ReportArgs& a) {
  std::vector<EvalReport> reports;
  for (const auto& in : a.inputs) {
    fs::path path = in;
    if (fs::is_directory(path)) {
      path /= a.domain.empty() ? "report.json" : "report-" + a.domain + ".json";
      if (!a.domain.empty() && !fs::exists(path)) path = fs::path(in) / "report.json";
    }
    if (!fs::exists(path)) throw MissingPrerequisiteError("no report at " + path.string());
    reports.push_back(report_from_json(read_file(path)));
  }
  std::cout << comparison_table(reports, a.metric, a.baseline);
  if (!a.csv.empty()) {
    const EvalReport* base = nullptr;
    for (const auto& r : reports) {
      if (r.model_id == a.baseline) base = &r;
    }
    std::ofstream out(a.csv, std::ios::trunc);
    out << heatmap_csv(reports.back(), base);
    if (!out) throw ConfigError("cannot write " + a.csv);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adapterforge: modular adapters for multilingual domain adaptation"};
  app.require_subcommand(1);

  std::string manifest;
  fs::path gen_data;
  auto* gen = app.add_subcommand("generate", "Generate the toy corpus and splits");
  gen->add_option("--manifest", manifest, "Manifest JSON (default manifest when omitted)");
  gen->add_option("--data", gen_data, "Output corpus directory")->required();

  auto* list = app.add_subcommand("presets", "List presets with full-shape trainable parameters");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Train and evaluate one preset");
  run->add_option("--preset", run_args.preset, "Preset id")->required();
  run->add_option("--data", run_args.data, "Corpus directory written by generate");
  run->add_option("--out", run_args.out, "Run root; artifacts go to <out>/<preset>");
  run->add_option("--seed", run_args.seed, "Seed for model init, sampling and dropout");
  run->add_option("--settings", run_args.settings, "Run settings JSON (training budgets, model size)");
  run->add_option("--device", run_args.device, "Compute device")->check(CLI::IsMember({"none"}));
  run->add_option("--scale", run_args.scale, "desk trains; paper-shape-count-only prints trainable parameters")
      ->check(CLI::IsMember({"desk", "paper-shape-count-only"}));

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Merge evaluation reports into a comparison table");
  report->add_option("inputs", report_args.inputs, "Preset directories or report.json files")->required();
  report->add_option("--metric", report_args.metric, "bleu or chrf")->check(CLI::IsMember({"bleu", "chrf"}));
  report->add_option("--baseline", report_args.baseline, "Model id used for the delta column");
  report->add_option("--domain", report_args.domain, "Domain report to read from preset directories");
  report->add_option("--csv", report_args.csv, "Write the last report's heatmap CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_generate(manifest, gen_data);
    if (*list) return cmd_presets();
    if (*run) return cmd_run(run_args);
    if (*report) return cmd_report(report_args);
  } catch (const MissingPrerequisiteError& e) {
    std::cerr << "missing prerequisite: " << e.what() << '\n';
    return kMissing;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
