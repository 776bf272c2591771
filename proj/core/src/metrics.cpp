// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "adapterforge/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "adapterforge/errors.hpp"

namespace adapterforge {
namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::int64_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::int64_t> out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++out[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
  return out;
}

std::map<std::string_view, std::int64_t> char_ngrams(std::string_view s, std::size_t n) {
  std::map<std::string_view, std::int64_t> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[s.substr(i, n)];
  return out;
}

std::string strip_whitespace(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Characters 13a splits off as separate tokens (underscore included).
bool is_13a_punct(char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') || (c >= '(' && c <= '+') ||
         (c >= ':' && c <= '@') || c == '/';
}

/// Left-to-right, non-overlapping rewrite of matching character pairs (a, b)
/// into "a b", with optional spaces before a and after b.
template <class Match>
std::string pair_rule(const std::string& s, Match match, bool space_before, bool space_after) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && match(s[i], s[i + 1])) {
      if (space_before) out += ' ';
      out += s[i];
      out += ' ';
      out += s[i + 1];
      if (space_after) out += ' ';
      i += 2;
    } else {
      out += s[i++];
    }
  }
  return out;
}

void check_corpus(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.empty()) throw UsageError("cannot score an empty corpus");
  if (hyps.size() != refs.size()) {
    throw UsageError("hypothesis count " + std::to_string(hyps.size()) + " differs from reference count " +
                     std::to_string(refs.size()));
  }
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < 4; ++n) {
    correct[n] += o.correct[n];
    total[n] += o.total[n];
  }
  sys_len += o.sys_len;
  ref_len += o.ref_len;
  return *this;
}

std::vector<std::string> tokenize_13a(std::string_view text) {
  std::string line(text);
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  replace_all(line, "&quot;", "\"");
  replace_all(line, "&amp;", "&");
  replace_all(line, "&lt;", "<");
  replace_all(line, "&gt;", ">");
  line = " " + line + " ";

  std::string spaced;
  for (char c : line) {
    if (is_13a_punct(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  line = pair_rule(spaced, [](char a, char b) { return !is_digit(a) && (b == '.' || b == ','); }, false, true);
  line = pair_rule(line, [](char a, char b) { return (a == '.' || a == ',') && !is_digit(b); }, true, false);
  line = pair_rule(line, [](char a, char b) { return is_digit(a) && b == '-'; }, false, true);

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

BleuStats bleu_statistics(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = tokenize_13a(hypothesis);
  const auto ref = tokenize_13a(reference);
  BleuStats s;
  s.sys_len = static_cast<std::int64_t>(hyp.size());
  s.ref_len = static_cast<std::int64_t>(ref.size());
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto h = ngram_counts(hyp, n);
    const auto r = ngram_counts(ref, n);
    for (const auto& [gram, count] : h) {
      s.total[n - 1] += count;
      if (auto it = r.find(gram); it != r.end()) s.correct[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

double bleu_from_statistics(const BleuStats& s) {
  std::array<double, 4> precision{};
  double smooth = 1.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (s.total[n] == 0) break;
    if (s.correct[n] == 0) {
      smooth *= 2.0;
      precision[n] = 100.0 / (smooth * static_cast<double>(s.total[n]));
    } else {
      precision[n] = 100.0 * static_cast<double>(s.correct[n]) / static_cast<double>(s.total[n]);
    }
  }
  if (std::any_of(precision.begin(), precision.end(), [](double p) { return p == 0.0; })) return 0.0;
  double bp = 1.0;
  if (s.sys_len < s.ref_len) {
    bp = s.sys_len > 0 ? std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.sys_len)) : 0.0;
  }
  double log_sum = 0.0;
  for (double p : precision) log_sum += std::log(p);
  // Precisions are percentages, so the geometric mean is already on the 0-100 scale.
  return bp * std::exp(log_sum / 4.0);
}

double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  check_corpus(hypotheses, references);
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += bleu_statistics(hypotheses[i], references[i]);
  return bleu_from_statistics(total);
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& o) {
  for (std::size_t n = 0; n < hyp.size(); ++n) {
    hyp[n] += o.hyp[n];
    ref[n] += o.ref[n];
    common[n] += o.common[n];
  }
  return *this;
}

ChrfStats chrf_statistics(std::string_view hypothesis, std::string_view reference, int order) {
  const std::string hyp = strip_whitespace(hypothesis);
  const std::string ref = strip_whitespace(reference);
  ChrfStats s(order);
  for (int n = 1; n <= order; ++n) {
    const auto h = char_ngrams(hyp, static_cast<std::size_t>(n));
    const auto r = char_ngrams(ref, static_cast<std::size_t>(n));
    const auto i = static_cast<std::size_t>(n - 1);
    for (const auto& [gram, count] : h) {
      s.hyp[i] += count;
      if (auto it = r.find(gram); it != r.end()) s.common[i] += std::min(count, it->second);
    }
    for (const auto& entry : r) s.ref[i] += entry.second;
  }
  return s;
}

double chrf_from_statistics(const ChrfStats& s, double beta) {
  double precision = 0.0;
  double recall = 0.0;
  int effective = 0;
  for (std::size_t n = 0; n < s.hyp.size(); ++n) {
    if (s.hyp[n] > 0 && s.ref[n] > 0) {
      precision += static_cast<double>(s.common[n]) / static_cast<double>(s.hyp[n]);
      recall += static_cast<double>(s.common[n]) / static_cast<double>(s.ref[n]);
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  precision /= effective;
  recall /= effective;
  if (precision + recall == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

double corpus_chrf(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references, int order,
                   double beta) {
  check_corpus(hypotheses, references);
  ChrfStats total(order);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += chrf_statistics(hypotheses[i], references[i], order);
  return chrf_from_statistics(total, beta);
}

}  // namespace adapterforge
