// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "adapterforge/errors.hpp"
#include "adapterforge/metrics.hpp"
#include "adapterforge/parallel.hpp"

namespace adapterforge {
namespace {

using nlohmann::json;

constexpr const char* kGroupNames[] = {"all", "in->in", "out->in", "in->out", "out->out"};

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  return s.str();
}

/// In-domain languages first, each block in grid order.
std::vector<std::string> grouped_languages(const EvalReport& r) {
  std::vector<std::string> out;
  for (const auto& l : r.languages) {
    if (contains(r.in_domain_languages, l)) out.push_back(l);
  }
  for (const auto& l : r.languages) {
    if (!contains(r.in_domain_languages, l)) out.push_back(l);
  }
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

int decode_limit(const TransformerModel& model, std::size_t src_len) {
  return std::min(model.config().max_len - 1, 2 * static_cast<int>(src_len) + 10);
}

Hypothesis translate(const TransformerModel& model, const Vocabulary& vocab, std::span<const int> src,
                     const std::string& tgt_lang, const ActivationPlan& plan, const BeamOptions& options) {
  std::vector<int> source = {vocab.language_token(tgt_lang)};
  if (plan.tag_token) source.push_back(*plan.tag_token);
  source.insert(source.end(), src.begin(), src.end());
  source.push_back(tok::kEos);
  ModelScorer scorer(model, source, plan);
  BeamOptions opt = options;
  opt.max_len = std::min(opt.max_len, decode_limit(model, src.size()));
  return beam_search(scorer, opt);
}

std::optional<double> off_target_rate(const std::vector<std::vector<int>>& hypotheses,
                                      const std::vector<std::vector<int>>& references, const std::string& tgt_lang,
                                      const LanguageIdentifier& identifier) {
  if (hypotheses.size() != references.size()) throw UsageError("hypothesis and reference counts differ");
  int denominator = 0;
  int on_target = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    if (identifier.identify(references[i]) != tgt_lang) continue;
    ++denominator;
    if (identifier.identify(hypotheses[i]) == tgt_lang) ++on_target;
  }
  if (denominator == 0) return std::nullopt;
  return 100.0 * on_target / denominator;
}

std::string to_string(RouteGroup g) {
  switch (g) {
    case RouteGroup::InIn:
      return "in->in";
    case RouteGroup::OutIn:
      return "out->in";
    case RouteGroup::InOut:
      return "in->out";
    case RouteGroup::OutOut:
      return "out->out";
  }
  return "?";
}

RouteGroup classify_route(const std::string& src, const std::string& tgt,
                          const std::vector<std::string>& in_domain_languages) {
  if (src == tgt) throw RoutingError("route " + src + "->" + tgt + " has no group");
  const bool s = contains(in_domain_languages, src);
  const bool t = contains(in_domain_languages, tgt);
  if (s && t) return RouteGroup::InIn;
  if (!s && t) return RouteGroup::OutIn;
  if (s && !t) return RouteGroup::InOut;
  return RouteGroup::OutOut;
}

const RouteScore* EvalReport::find(const std::string& src, const std::string& tgt) const {
  for (const auto& r : rows) {
    if (r.src == src && r.tgt == tgt) return &r;
  }
  return nullptr;
}

void aggregate(EvalReport& report) {
  struct Acc {
    double bleu = 0.0, chrf = 0.0, on_target = 0.0;
    int n = 0, n_on = 0;
  };
  std::map<std::string, Acc> acc;
  for (const char* g : kGroupNames) acc[g];
  for (const auto& r : report.rows) {
    const std::string group = to_string(classify_route(r.src, r.tgt, report.in_domain_languages));
    for (const auto& key : {std::string("all"), group}) {
      Acc& a = acc[key];
      a.bleu += r.bleu;
      a.chrf += r.chrf;
      ++a.n;
      if (r.on_target) {
        a.on_target += *r.on_target;
        ++a.n_on;
      }
    }
  }
  report.groups.clear();
  for (const auto& [name, a] : acc) {
    GroupMeans m;
    m.routes = a.n;
    if (a.n > 0) {
      m.bleu = a.bleu / a.n;
      m.chrf = a.chrf / a.n;
    }
    if (a.n_on > 0) m.on_target = a.on_target / a.n_on;
    report.groups[name] = m;
  }
}

std::string report_to_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"src", row.src},
                    {"tgt", row.tgt},
                    {"bleu", row.bleu},
                    {"chrf", row.chrf},
                    {"on_target", optional_json(row.on_target)},
                    {"n_scored", row.n_scored}});
  }
  json groups = json::object();
  for (const auto& [name, g] : r.groups) {
    groups[name] = {{"bleu", g.bleu}, {"chrf", g.chrf}, {"on_target", optional_json(g.on_target)}, {"routes", g.routes}};
  }
  json j{{"model_id", r.model_id},
         {"baseline_id", r.baseline_id},
         {"domain", r.domain},
         {"languages", r.languages},
         {"in_domain_languages", r.in_domain_languages},
         {"rows", rows},
         {"groups", groups}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.model_id = j.at("model_id").get<std::string>();
    r.baseline_id = j.value("baseline_id", std::string());
    r.domain = j.value("domain", std::string());
    r.languages = j.at("languages").get<std::vector<std::string>>();
    r.in_domain_languages = j.at("in_domain_languages").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      r.rows.push_back({row.at("src").get<std::string>(), row.at("tgt").get<std::string>(),
                        row.at("bleu").get<double>(), row.at("chrf").get<double>(), optional_from(row.at("on_target")),
                        row.at("n_scored").get<int>()});
    }
    aggregate(r);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string heatmap_csv(const EvalReport& report, const EvalReport* baseline) {
  std::ostringstream out;
  out << "src_lang,tgt_lang,metric,value,delta_vs_baseline\n";
  const auto langs = grouped_languages(report);
  for (const auto& src : langs) {
    for (const auto& tgt : langs) {
      if (src == tgt) continue;
      const RouteScore* row = report.find(src, tgt);
      if (!row) continue;
      const RouteScore* base = baseline ? baseline->find(src, tgt) : nullptr;
      auto emit = [&](const char* metric, std::optional<double> v, std::optional<double> b) {
        out << src << ',' << tgt << ',' << metric << ',';
        if (v) out << fixed(*v, 4);
        out << ',';
        if (v && b) out << fixed(*v - *b, 4);
        out << '\n';
      };
      emit("bleu", row->bleu, base ? std::optional<double>(base->bleu) : std::nullopt);
      emit("chrf", row->chrf, base ? std::optional<double>(base->chrf) : std::nullopt);
      emit("on_target", row->on_target, base ? base->on_target : std::nullopt);
    }
  }
  return out.str();
}

std::string format_cell(double score, std::optional<double> on_target, int decimals) {
  std::string cell = fixed(score, decimals);
  if (on_target && *on_target < 90.0) cell += " (" + fixed(*on_target, 0) + "%)";
  return cell;
}

std::string comparison_table(const std::vector<EvalReport>& reports, const std::string& metric,
                             const std::string& baseline_id) {
  if (reports.empty()) throw ConfigError("no reports to compare");
  if (metric != "bleu" && metric != "chrf") throw ConfigError("unknown metric " + metric);
  for (const auto& r : reports) {
    if (r.languages != reports.front().languages || r.in_domain_languages != reports.front().in_domain_languages) {
      throw ConfigError("report " + r.model_id + " covers a different language grid than " +
                        reports.front().model_id);
    }
  }
  const EvalReport* baseline = nullptr;
  if (!baseline_id.empty()) {
    for (const auto& r : reports) {
      if (r.model_id == baseline_id) baseline = &r;
    }
    if (!baseline) throw ConfigError("baseline " + baseline_id + " is not among the reports");
  }
  const int decimals = metric == "bleu" ? 1 : 3;
  auto value = [&](const GroupMeans& g) { return metric == "bleu" ? g.bleu : g.chrf; };
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model_id.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "model";
  for (const char* g : kGroupNames) out << " | " << std::setw(12) << g;
  if (baseline) out << " | delta(all)";
  out << '\n';
  for (const auto& r : reports) {
    out << std::setw(static_cast<int>(width)) << r.model_id;
    for (const char* g : kGroupNames) {
      const GroupMeans& m = r.groups.at(g);
      out << " | " << std::setw(12) << format_cell(value(m), m.on_target, decimals);
    }
    if (baseline) {
      const double d = value(r.groups.at("all")) - value(baseline->groups.at("all"));
      out << " | " << (d >= 0 ? "+" : "") << fixed(d, decimals);
    }
    out << '\n';
  }
  return out.str();
}

EvalReport evaluate_grid(const TransformerModel& model, const Vocabulary& vocab, const MultiParallelCorpus& test,
                         const std::vector<std::string>& languages,
                         const std::vector<std::string>& in_domain_languages,
                         const std::function<ActivationPlan(const Route&)>& plan_for, const EvalOptions& options) {
  EvalReport report;
  report.domain = test.domain;
  report.languages = languages;
  report.in_domain_languages = in_domain_languages;
  std::vector<Route> routes;
  for (const auto& s : languages) {
    for (const auto& t : languages) {
      if (s != t) routes.push_back(Route{s, t, test.domain});
    }
  }
  std::vector<ActivationPlan> plans;
  for (const auto& r : routes) {
    plans.push_back(plan_for(r));
    model.validate_plan(plans.back());
  }
  std::size_t lines = test.size();
  if (options.max_lines > 0) lines = std::min(lines, static_cast<std::size_t>(options.max_lines));
  if (lines == 0) throw CorpusError("empty test set for domain " + test.domain);

  // Work items are (route, line) so a single slow route cannot serialise the pool.
  std::vector<std::vector<std::vector<int>>> outputs(routes.size(), std::vector<std::vector<int>>(lines));
  parallel_for(routes.size() * lines, [&](std::size_t item) {
    const std::size_t r = item / lines;
    const std::size_t i = item % lines;
    outputs[r][i] =
        translate(model, vocab, test.sentence(routes[r].src, i), routes[r].tgt, plans[r], options.beam).tokens;
  });

  const ToyLanguageIdentifier identifier(vocab);
  for (std::size_t r = 0; r < routes.size(); ++r) {
    std::vector<std::string> hyp_text;
    std::vector<std::string> ref_text;
    std::vector<std::vector<int>> refs;
    for (std::size_t i = 0; i < lines; ++i) {
      refs.push_back(test.sentence(routes[r].tgt, i));
      hyp_text.push_back(vocab.detokenize(outputs[r][i]));
      ref_text.push_back(vocab.detokenize(refs.back()));
    }
    RouteScore row;
    row.src = routes[r].src;
    row.tgt = routes[r].tgt;
    row.bleu = corpus_bleu(hyp_text, ref_text);
    row.chrf = corpus_chrf(hyp_text, ref_text);
    row.on_target = off_target_rate(outputs[r], refs, routes[r].tgt, identifier);
    row.n_scored = static_cast<int>(lines);
    report.rows.push_back(std::move(row));
  }
  aggregate(report);
  return report;
}

}  // namespace adapterforge
