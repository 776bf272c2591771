// Copyright (c) 2026 The adapterforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace adapterforge::oracle {

/// Corpus scores computed once with sacrebleu 1.5.1 defaults (BLEU: exp
/// smoothing, 13a; chrF: order 6, beta 2, 0-1 scale) and frozen here.
struct MetricFixture {
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  double bleu;
  double chrf;
};

inline const std::vector<MetricFixture>& sacrebleu_fixtures() {
  static const std::vector<MetricFixture> fixtures = {
      {{"ka_fr ka_fr 7 mina_fr po_cs 5 5 kobe_fr tu_fr", ""},
       {"la_fr 3 5 5 la_fr tu_fr", "sa_cs la_fr la_fr"},
       21.79301929852717, 0.27264572629558437},
      {{""},
       {"kobe_fr la_fr 5 la_fr po_cs mina_fr la_fr sa_cs"},
       0.0, 0.0},
      {{"5 tu_fr po_cs 3 3 5 mer_de 5"},
       {"5 tu_fr po_cs 3 3 5 mer_de 5"},
       100.00000000000004, 1.0},
      {{"", "zo_de", "tu_fr 5", "sa_cs"},
       {"tu_fr po_cs kobe_fr mina_fr", "zo_de", "la_fr 7 la_fr 7", "5 sa_cs"},
       11.231166632700857, 0.16973960879069278},
      {{"zo_de la_fr kobe_fr tu_fr tu_fr kobe_fr 5", "ka_fr kobe_fr 5", "mina_fr la_fr mer_de", "7 kobe_fr 7", ""},
       {"mina_fr 7 3 3 tu_fr 5 ka_fr", "zo_de po_cs mina_fr ka_fr mer_de kobe_fr 3 5 mer_de", "mina_fr la_fr mer_de", "7 kobe_fr 7", "mina_fr ka_fr 7 po_cs 7 ka_fr 7"},
       25.665938671957456, 0.36605174123926115},
      {{"7 7", "tu_fr mina_fr tu_fr", "mer_de ka_fr ka_fr kobe_fr sa_cs mina_fr", "", "po_cs ka_fr po_cs ka_fr mina_fr la_fr mer_de 7"},
       {"7 sa_cs 7", "3", "sa_cs mer_de kobe_fr mina_fr ka_fr ka_fr", "mina_fr po_cs 5 7", "kobe_fr sa_cs"},
       21.39583871131533, 0.429533010300042},
      {{"", "la_fr sa_cs 3 kobe_fr la_fr zo_de 5 mina_fr", "3 mer_de kobe_fr 3 po_cs 7 sa_cs tu_fr sa_cs mina_fr", "kobe_fr mina_fr mina_fr kobe_fr la_fr mer_de 7 po_cs po_cs"},
       {"7 mina_fr po_cs sa_cs mina_fr tu_fr 5", "la_fr sa_cs 3 kobe_fr la_fr zo_de 5 mina_fr", "po_cs tu_fr la_fr 5 zo_de", "la_fr 7 mina_fr ka_fr zo_de"},
       43.17709934477215, 0.5127119243349988},
      {{"la_fr po_cs mina_fr tu_fr mer_de la_fr kobe_fr"},
       {"ka_fr mina_fr 5"},
       8.500539049202116, 0.4113690688505953},
      {{"tu_fr kobe_fr po_cs kobe_fr ka_fr 3", "kobe_fr mina_fr ka_fr kobe_fr 3 ka_fr", "3 7 kobe_fr po_cs", "mina_fr 5 ka_fr zo_de mina_fr", "7 5 mer_de 7 tu_fr 3 mer_de"},
       {"tu_fr kobe_fr po_cs kobe_fr ka_fr 3", "sa_cs sa_cs kobe_fr mina_fr po_cs 5 3 zo_de", "kobe_fr po_cs po_cs mer_de ka_fr la_fr mer_de", "mina_fr 5 ka_fr zo_de mina_fr", "tu_fr mer_de 7 sa_cs mina_fr 7 3 tu_fr la_fr"},
       46.72996490492339, 0.5527397166202763},
      {{"zo_de zo_de ka_fr tu_fr kobe_fr kobe_fr mer_de", "", "zo_de"},
       {"mer_de 5 mina_fr", "mina_fr mer_de 3 mina_fr ka_fr zo_de 5", "tu_fr tu_fr mina_fr tu_fr ka_fr kobe_fr sa_cs sa_cs"},
       3.051631151804552, 0.07351021369798143},
      {{"mina_fr", "zo_de tu_fr mer_de kobe_fr kobe_fr kobe_fr la_fr tu_fr kobe_fr", "zo_de mer_de sa_cs sa_cs", "kobe_fr tu_fr sa_cs 5", "7 tu_fr"},
       {"mina_fr", "zo_de tu_fr mer_de kobe_fr kobe_fr kobe_fr la_fr tu_fr kobe_fr", "mer_de po_cs zo_de sa_cs sa_cs", "kobe_fr sa_cs tu_fr 5", "tu_fr 5 po_cs sa_cs po_cs"},
       70.88959284853996, 0.777458750039625},
      {{"kobe_fr mina_fr kobe_fr", "mer_de kobe_fr zo_de la_fr", "kobe_fr", "kobe_fr tu_fr 3"},
       {"kobe_fr mina_fr kobe_fr", "la_fr mer_de zo_de kobe_fr", "mina_fr zo_de 3 mina_fr 3 sa_cs", "tu_fr"},
       50.40076425220409, 0.5827843812855533},
  };
  return fixtures;
}

}  // namespace adapterforge::oracle
