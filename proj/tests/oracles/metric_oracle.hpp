// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <utility>
#include <sstream>
#include <string>
#include <vector>

namespace adapterforge::oracle {

/// mteval-v13a tokenisation written directly from its regular expressions.
inline std::vector<std::string> regex_13a(std::string line) {
  const std::pair<const char*, const char*> unescape[] = {{"<skipped>", ""}, {"-\n", ""},  {"\n", " "},
                                                          {"&quot;", "\""},  {"&amp;", "&"}, {"&lt;", "<"},
                                                          {"&gt;", ">"}};
  for (const auto& [from, to] : unescape) line = std::regex_replace(line, std::regex(from), to);
  line = " " + line + " ";
  line = std::regex_replace(line, std::regex(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))"), " $1 ");
  line = std::regex_replace(line, std::regex(R"(([^0-9])([\.,]))"), "$1 $2 ");
  line = std::regex_replace(line, std::regex(R"(([\.,])([^0-9]))"), " $1 $2");
  line = std::regex_replace(line, std::regex(R"(([0-9])(-))"), "$1 $2 ");
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

/// Brute-force corpus BLEU: n-grams as string vectors in ordered maps, exp
/// smoothing, brevity penalty. Written without reference to the library.
inline double brute_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  auto words = [](const std::string& s) { return regex_13a(s); };
  double correct[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double sys = 0;
  double ref = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto h = words(hyps[i]);
    const auto r = words(refs[i]);
    sys += static_cast<double>(h.size());
    ref += static_cast<double>(r.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, int> hc;
      std::map<std::vector<std::string>, int> rc;
      for (std::size_t k = 0; k + n <= h.size(); ++k) ++hc[{h.begin() + k, h.begin() + k + n}];
      for (std::size_t k = 0; k + n <= r.size(); ++k) ++rc[{r.begin() + k, r.begin() + k + n}];
      for (const auto& [g, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) correct[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (sys == 0) return 0.0;
  double log_sum = 0.0;
  double smooth = 1.0;
  for (int n = 0; n < 4; ++n) {
    double p = 0.0;
    if (total[n] > 0) {
      if (correct[n] > 0) {
        p = 100.0 * correct[n] / total[n];
      } else {
        smooth *= 2.0;
        p = 100.0 / (smooth * total[n]);
      }
    }
    if (p <= 0.0) return 0.0;
    log_sum += std::log(p);
  }
  const double bp = sys < ref ? std::exp(1.0 - ref / sys) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

/// Brute-force corpus chrF (character 1..6-grams, spaces removed, beta 2).
inline double brute_chrf(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  constexpr int kOrder = 6;
  constexpr double kBeta = 2.0;
  double hyp_n[kOrder] = {};
  double ref_n[kOrder] = {};
  double common[kOrder] = {};
  auto squeeze = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c != ' ') out.push_back(c);
    }
    return out;
  };
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const std::string h = squeeze(hyps[i]);
    const std::string r = squeeze(refs[i]);
    for (int n = 1; n <= kOrder; ++n) {
      std::map<std::string, int> hc;
      std::map<std::string, int> rc;
      for (std::size_t k = 0; k + n <= h.size(); ++k) ++hc[h.substr(k, n)];
      for (std::size_t k = 0; k + n <= r.size(); ++k) ++rc[r.substr(k, n)];
      for (const auto& [g, c] : hc) {
        hyp_n[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) common[n - 1] += std::min(c, it->second);
      }
      for (const auto& [g, c] : rc) ref_n[n - 1] += c;
    }
  }
  double p = 0.0;
  double r = 0.0;
  int used = 0;
  for (int n = 0; n < kOrder; ++n) {
    if (hyp_n[n] > 0 && ref_n[n] > 0) {
      p += common[n] / hyp_n[n];
      r += common[n] / ref_n[n];
      ++used;
    }
  }
  if (used == 0) return 0.0;
  p /= used;
  r /= used;
  if (p + r == 0.0) return 0.0;
  const double b2 = kBeta * kBeta;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

}  // namespace adapterforge::oracle
