// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adapterforge/beam_search.hpp"
#include "adapterforge/corpus.hpp"
#include "adapterforge/plan.hpp"
#include "adapterforge/transformer.hpp"
#include "adapterforge/vocabulary.hpp"

namespace adapterforge {

/// Decodes one source sentence into tgt_lang. The source is wrapped as
/// [<2tgt>] + [tag] + src + [</s>] per the plan.
Hypothesis translate(const TransformerModel& model, const Vocabulary& vocab, std::span<const int> src,
                     const std::string& tgt_lang, const ActivationPlan& plan, const BeamOptions& options);

/// Decode length cap for a source of the given length.
int decode_limit(const TransformerModel& model, std::size_t src_len);

/// Percentage of hypotheses identified as tgt_lang, counted over the lines
/// whose reference is identified as tgt_lang. Absent when no reference is.
std::optional<double> off_target_rate(const std::vector<std::vector<int>>& hypotheses,
                                      const std::vector<std::vector<int>>& references, const std::string& tgt_lang,
                                      const LanguageIdentifier& identifier);

enum class RouteGroup { InIn, OutIn, InOut, OutOut };
std::string to_string(RouteGroup g);
/// Throws RoutingError for src == tgt.
RouteGroup classify_route(const std::string& src, const std::string& tgt,
                          const std::vector<std::string>& in_domain_languages);

struct RouteScore {
  std::string src;
  std::string tgt;
  double bleu = 0.0;
  double chrf = 0.0;
  std::optional<double> on_target;
  int n_scored = 0;
};

/// Unweighted means over routes; on_target averages the routes where it is
/// defined.
struct GroupMeans {
  double bleu = 0.0;
  double chrf = 0.0;
  std::optional<double> on_target;
  int routes = 0;
};

struct EvalReport {
  std::string model_id;
  std::string baseline_id;
  std::string domain;
  std::vector<std::string> languages;
  std::vector<std::string> in_domain_languages;
  std::vector<RouteScore> rows;
  std::map<std::string, GroupMeans> groups;  ///< "all", "in->in", "out->in", "in->out", "out->out"

  [[nodiscard]] const RouteScore* find(const std::string& src, const std::string& tgt) const;
};

/// Fills groups from rows. Every row must classify.
void aggregate(EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Rows "src_lang,tgt_lang,metric,value,delta_vs_baseline", one per ordered
/// pair and metric, in-domain languages first.
std::string heatmap_csv(const EvalReport& report, const EvalReport* baseline);

/// "93.1" style cell: the score, plus the on-target percentage in brackets
/// when it is below 90%.
std::string format_cell(double score, std::optional<double> on_target, int decimals = 1);

/// Table with one row per report and the five group columns. With a baseline,
/// a delta column follows the overall mean. Throws ConfigError when the
/// reports cover different language grids.
std::string comparison_table(const std::vector<EvalReport>& reports, const std::string& metric,
                             const std::string& baseline_id);

struct EvalOptions {
  BeamOptions beam;
  /// Lines per route; 0 scores the whole test set.
  int max_lines = 0;
};

/// Scores every ordered pair of `languages` on one domain's test split.
/// Routes are decoded in parallel over the frozen model.
EvalReport evaluate_grid(const TransformerModel& model, const Vocabulary& vocab, const MultiParallelCorpus& test,
                         const std::vector<std::string>& languages,
                         const std::vector<std::string>& in_domain_languages,
                         const std::function<ActivationPlan(const Route&)>& plan_for, const EvalOptions& options);

}  // namespace adapterforge
