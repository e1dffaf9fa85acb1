#pragma once

// Synthetic pipeline inputs shared by the index, service, CLI and
// acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "scichal/index_store.hpp"

namespace scichal::fixture {

struct Synthetic {
  BuildInputs inputs;
  std::vector<SliceLogits> logits;
  std::vector<MentionRecord> mentions;
};

inline const std::vector<KbEntity>& synthetic_kb() {
  static const std::vector<KbEntity> kKb{
      {"E01", "COVID-19", {"coronavirus disease 2019", "covid"}},
      {"E02", "SARS-CoV-2", {"severe acute respiratory syndrome coronavirus 2"}},
      {"E03", "ACE2", {"angiotensin-converting enzyme 2"}},
      {"E04", "remdesivir", {}},
      {"E05", "interleukin-6", {"IL-6"}},
      {"E06", "hydroxychloroquine", {"HCQ"}},
      {"E07", "cytokine storm", {}},
      {"E08", "vaccine", {"vaccination"}},
      {"E09", "spike protein", {}},
      {"E10", "ventilator", {"mechanical ventilation"}},
      {"E11", "T cell", {"T lymphocyte"}},
      {"E12", "influenza", {"flu"}},
  };
  return kKb;
}

// `n` sentences spread over n/5 papers, each mentioning one to three KB
// entities by canonical name. Scores and logits are drawn so that both
// sides of the 0.99 threshold are well populated.
inline Synthetic make_synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Synthetic out;
  const auto& kb = synthetic_kb();
  out.inputs.kb = kb;
  const std::size_t papers = std::max<std::size_t>(1, n / 5);
  for (std::size_t p = 0; p < papers; ++p) {
    PaperRecord pr;
    pr.paper_id = "paper" + std::to_string(p);
    pr.title = "Study " + std::to_string(p);
    pr.date = "2020-0" + std::to_string(1 + p % 9);
    pr.journal = p % 2 ? std::optional<std::string>("J. Virol.") : std::nullopt;
    out.inputs.papers.push_back(pr);
  }
  std::vector<std::size_t> per_paper(papers, 0);
  std::vector<std::string> prev(papers);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t p = i % papers;
    SentenceRecord s;
    s.paper_id = out.inputs.papers[p].paper_id;
    s.position = static_cast<std::int64_t>(per_paper[p]++);
    std::vector<std::size_t> ents;
    for (std::size_t k = 0, m = 1 + rng() % 3; k < m; ++k) ents.push_back(rng() % kb.size());
    std::string text = "In cohort " + std::to_string(i) + " the role of " + kb[ents[0]].canonical_name;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    auto cp_len = [](const std::string& t) { return text::codepoints(t).size(); };
    spans.push_back({cp_len(text) - cp_len(kb[ents[0]].canonical_name), cp_len(text)});
    for (std::size_t k = 1; k < ents.size(); ++k) {
      text += " and ";
      const std::size_t start = cp_len(text);
      text += kb[ents[k]].canonical_name;
      spans.push_back({start, cp_len(text)});
    }
    text += " remains unclear.";
    s.text = text;
    if (s.position > 0) s.prev_text = prev[p];
    prev[p] = text;
    s.sentence_id = make_sentence_id(s.paper_id, s.position, s.text);
    out.inputs.sentences.push_back(s);

    SliceLogits sl;
    sl.sentence_id = s.sentence_id;
    const double bc = u(rng) < 0.4 ? 6.5 : -2.0, bd = u(rng) < 0.3 ? 6.5 : -2.0;
    for (auto& l : sl.slices) l = {bc + std::round((u(rng) - 0.5) * 64) / 16, bd + std::round((u(rng) - 0.5) * 64) / 16};
    out.logits.push_back(sl);
    out.inputs.scored.push_back(slice_combine(sl, CombineStrategy::mean()));

    for (std::size_t k = 0; k < ents.size(); ++k) {
      out.mentions.push_back({s.sentence_id, kb[ents[k]].canonical_name, spans[k].first, spans[k].second, "ner"});
      out.inputs.links.push_back({s.sentence_id, kb[ents[k]].entity_id, kb[ents[k]].canonical_name, 1.0});
    }
  }
  // Fix next_text now that every paper's sentence list is known.
  std::map<std::pair<std::string, std::int64_t>, std::string> by_pos;
  for (const auto& s : out.inputs.sentences) by_pos[{s.paper_id, s.position}] = s.text;
  for (auto& s : out.inputs.sentences) {
    if (auto it = by_pos.find({s.paper_id, s.position + 1}); it != by_pos.end()) s.next_text = it->second;
  }
  for (auto& pr : out.inputs.papers) {
    for (std::int64_t k = 0;; ++k) {
      auto it = by_pos.find({pr.paper_id, k});
      if (it == by_pos.end()) break;
      pr.sentences.push_back(it->second);
    }
  }
  out.inputs.vocab = build_entity_vocabulary(out.inputs.links, 1, 30000);
  return out;
}

}  // namespace scichal::fixture
