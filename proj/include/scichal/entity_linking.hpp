#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scichal/jsonl.hpp"
#include "scichal/parallel.hpp"
#include "scichal/text.hpp"

namespace scichal {

struct KbEntity {
  std::string entity_id;
  std::string canonical_name;
  std::vector<std::string> aliases;

  bool operator==(const KbEntity&) const = default;
};

struct MentionRecord {
  std::string sentence_id;
  std::string surface;
  std::size_t span_start = 0;  // codepoint offsets, half-open
  std::size_t span_end = 0;
  std::string source_model;

  bool operator==(const MentionRecord&) const = default;
};

struct EntityLink {
  std::string sentence_id;
  std::string entity_id;
  std::string surface;
  double similarity = 0.0;

  bool operator==(const EntityLink&) const = default;
};

inline json to_json(const KbEntity& e) {
  return json{{"entity_id", e.entity_id}, {"canonical_name", e.canonical_name}, {"aliases", e.aliases}};
}

inline KbEntity kb_entity_from_json(const json& j) {
  KbEntity e;
  e.entity_id = field::string(j, "entity_id");
  if (e.entity_id.empty()) fail(ErrorCode::kSchema, "empty entity_id");
  e.canonical_name = field::string(j, "canonical_name");
  if (auto it = j.find("aliases"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) fail(ErrorCode::kSchema, "aliases must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) fail(ErrorCode::kSchema, "aliases must hold strings");
      e.aliases.push_back(a.get<std::string>());
    }
  }
  return e;
}

inline json to_json(const MentionRecord& m) {
  return json{{"sentence_id", m.sentence_id},
              {"surface", m.surface},
              {"char_span", json::array({m.span_start, m.span_end})},
              {"source_model", m.source_model}};
}

inline MentionRecord mention_from_json(const json& j) {
  MentionRecord m;
  m.sentence_id = field::string(j, "sentence_id");
  m.surface = field::string(j, "surface");
  const json& span = field::required(j, "char_span");
  if (!span.is_array() || span.size() != 2 || !span[0].is_number_unsigned() || !span[1].is_number_unsigned()) {
    fail(ErrorCode::kSchema, "char_span must be [start, end] with non-negative integers");
  }
  m.span_start = span[0].get<std::size_t>();
  m.span_end = span[1].get<std::size_t>();
  if (m.span_start > m.span_end) fail(ErrorCode::kSchema, "char_span start exceeds end");
  m.source_model = field::optional_string(j, "source_model").value_or("");
  return m;
}

inline json to_json(const EntityLink& l) {
  return json{{"sentence_id", l.sentence_id},
              {"entity_id", l.entity_id},
              {"surface", l.surface},
              {"similarity", l.similarity}};
}

inline EntityLink entity_link_from_json(const json& j) {
  EntityLink l;
  l.sentence_id = field::string(j, "sentence_id");
  l.entity_id = field::string(j, "entity_id");
  l.surface = field::optional_string(j, "surface").value_or("");
  l.similarity = field::number(j, "similarity");
  if (!(l.similarity >= 0.0 && l.similarity <= 1.0)) fail(ErrorCode::kSchema, "similarity must be in [0,1]");
  return l;
}

// Span must lie inside the sentence and cover exactly the surface string.
inline bool mention_matches_sentence(const MentionRecord& m, std::string_view sentence_text) {
  const auto cps = text::codepoints(sentence_text);
  if (m.span_end > cps.size() || m.span_start > m.span_end) return false;
  std::vector<UChar32> slice(cps.begin() + static_cast<std::ptrdiff_t>(m.span_start),
                             cps.begin() + static_cast<std::ptrdiff_t>(m.span_end));
  return text::to_utf8(slice) == m.surface;
}

// ---------------------------------------------------------------------------
// Character trigrams

// Sparse vector sorted by trigram.
using TrigramVector = std::vector<std::pair<std::string, double>>;
using IdfTable = std::unordered_map<std::string, double>;

struct TrigramOptions {
  bool pad = true;                  // add '#' at both ends
  const IdfTable* idf = nullptr;    // null: every weight is 1 x tf
  double unseen_idf = 1.0;          // weight for trigrams missing from idf
};

inline std::vector<std::string> trigrams(std::string_view s, bool pad) {
  const std::string key = text::normalize_key(s);
  std::vector<std::string> out;
  if (key.empty()) return out;
  std::vector<UChar32> cps = text::codepoints(key);
  if (pad) {
    cps.insert(cps.begin(), U'#');
    cps.push_back(U'#');
  }
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    out.push_back(text::to_utf8({cps[i], cps[i + 1], cps[i + 2]}));
  }
  return out;
}

// Normalizes (NFC, lowercase, punctuation stripped), optionally pads, and
// weights each trigram by term frequency times idf.
inline TrigramVector trigram_profile(std::string_view s, const TrigramOptions& opts = {}) {
  std::map<std::string, double> tf;
  for (auto& g : trigrams(s, opts.pad)) tf[g] += 1.0;
  TrigramVector v;
  v.reserve(tf.size());
  for (auto& [g, n] : tf) {
    double w = 1.0;
    if (opts.idf) {
      auto it = opts.idf->find(g);
      w = it == opts.idf->end() ? opts.unseen_idf : it->second;
    }
    v.emplace_back(g, n * w);
  }
  return v;
}

inline double squared_norm(const TrigramVector& v) {
  double n = 0;
  for (const auto& [_, w] : v) n += w * w;
  return n;
}

inline double cosine(const TrigramVector& a, const TrigramVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return dot / std::sqrt(squared_norm(a) * squared_norm(b));
}

// Cosine between two names. Exactly 1.0 iff their normalized forms are
// identical and nonempty; rounding never lifts distinct names to 1.0.
inline double name_similarity(std::string_view a, std::string_view b, const TrigramOptions& opts = {}) {
  const std::string ka = text::normalize_key(a);
  const std::string kb = text::normalize_key(b);
  if (ka.empty() || kb.empty()) return 0.0;
  if (ka == kb) return 1.0;
  const double c = cosine(trigram_profile(ka, opts), trigram_profile(kb, opts));
  return std::clamp(c, 0.0, std::nextafter(1.0, 0.0));
}

// Exact nearest-name search over a KB. Built once, then read-only; safe for
// concurrent link() calls. Candidates come from a trigram inverted index,
// which is exact because a name sharing no trigram has similarity 0.
class KbIndex {
 public:
  struct Options {
    bool use_idf = true;  // idf from the KB's own name corpus
  };

  explicit KbIndex(std::vector<KbEntity> entities) : KbIndex(std::move(entities), Options{}) {}

  KbIndex(std::vector<KbEntity> entities, Options options) : entities_(std::move(entities)) {
    if (entities_.empty()) fail(ErrorCode::kValidation, "knowledge base is empty");
    std::sort(entities_.begin(), entities_.end(),
              [](const KbEntity& a, const KbEntity& b) { return a.entity_id < b.entity_id; });
    for (std::size_t i = 1; i < entities_.size(); ++i) {
      if (entities_[i].entity_id == entities_[i - 1].entity_id) {
        fail(ErrorCode::kValidation, "duplicate entity_id " + entities_[i].entity_id);
      }
    }
    for (std::size_t e = 0; e < entities_.size(); ++e) {
      std::set<std::string> keys;
      auto add = [&](const std::string& name) {
        std::string key = text::normalize_key(name);
        if (!key.empty() && keys.insert(key).second) names_.push_back({e, std::move(key), {}});
      };
      add(entities_[e].canonical_name);
      for (const auto& a : entities_[e].aliases) add(a);
    }
    if (options.use_idf) {
      std::unordered_map<std::string, std::size_t> df;
      for (const auto& n : names_) {
        std::set<std::string> uniq;
        for (auto& g : trigrams(n.key, true)) uniq.insert(std::move(g));
        for (const auto& g : uniq) ++df[g];
      }
      const double total = static_cast<double>(names_.size());
      for (const auto& [g, d] : df) idf_[g] = std::log((1.0 + total) / (1.0 + static_cast<double>(d))) + 1.0;
      unseen_idf_ = std::log(1.0 + total) + 1.0;
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
      names_[i].profile = trigram_profile(names_[i].key, options_for_profiles());
      for (const auto& [g, _] : names_[i].profile) postings_[g].push_back(i);
    }
  }

  const std::vector<KbEntity>& entities() const { return entities_; }

  TrigramOptions options_for_profiles() const {
    TrigramOptions o;
    o.pad = true;
    o.idf = idf_.empty() ? nullptr : &idf_;
    o.unseen_idf = unseen_idf_;
    return o;
  }

  struct Match {
    std::string entity_id;
    double similarity = 0.0;
  };

  // Best entity by maximum similarity over its names; ties go to the
  // smaller entity_id.
  std::optional<Match> best_match(std::string_view surface) const {
    const std::string key = text::normalize_key(surface);
    if (key.empty()) return std::nullopt;
    const TrigramVector q = trigram_profile(key, options_for_profiles());
    std::vector<std::size_t> candidates;
    for (const auto& [g, _] : q) {
      if (auto it = postings_.find(g); it != postings_.end()) {
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::optional<std::size_t> best_entity;
    double best = -1.0;
    for (std::size_t i : candidates) {
      const Name& n = names_[i];
      double sim = n.key == key ? 1.0 : std::clamp(cosine(q, n.profile), 0.0, std::nextafter(1.0, 0.0));
      // Entities are sorted by id, so the smaller index wins ties.
      if (sim > best || (sim == best && n.entity < *best_entity)) {
        best = sim;
        best_entity = n.entity;
      }
    }
    if (!best_entity) return std::nullopt;
    return Match{entities_[*best_entity].entity_id, best};
  }

 private:
  struct Name {
    std::size_t entity;
    std::string key;
    TrigramVector profile;
  };

  std::vector<KbEntity> entities_;
  std::vector<Name> names_;
  IdfTable idf_;
  double unseen_idf_ = 1.0;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

inline std::optional<EntityLink> link_mention(const MentionRecord& m, const KbIndex& kb, double threshold = 0.9) {
  if (!(threshold > 0.0 && threshold <= 1.0)) fail(ErrorCode::kValidation, "link threshold must be in (0,1]");
  auto match = kb.best_match(m.surface);
  if (!match || match->similarity < threshold) return std::nullopt;
  return EntityLink{m.sentence_id, match->entity_id, m.surface, match->similarity};
}

inline std::vector<EntityLink> link_mentions(const std::vector<MentionRecord>& mentions, const KbIndex& kb,
                                             double threshold = 0.9, std::size_t jobs = 1) {
  auto results = parallel_map(mentions, [&](const MentionRecord& m) { return link_mention(m, kb, threshold); }, jobs);
  std::vector<EntityLink> out;
  for (auto& r : results) {
    if (r) out.push_back(std::move(*r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entity vocabulary

struct VocabEntry {
  std::string entity_id;
  std::size_t sentence_count = 0;

  bool operator==(const VocabEntry&) const = default;
};

inline json to_json(const VocabEntry& v) {
  return json{{"entity_id", v.entity_id}, {"sentence_count", v.sentence_count}};
}

inline VocabEntry vocab_entry_from_json(const json& j) {
  VocabEntry v;
  v.entity_id = field::string(j, "entity_id");
  const auto n = field::integer(j, "sentence_count");
  if (n < 0) fail(ErrorCode::kSchema, "sentence_count must be >= 0");
  v.sentence_count = static_cast<std::size_t>(n);
  return v;
}

// Distinct-sentence count per entity, entities below min_sentences dropped,
// the top_k most frequent kept (ties by entity_id), sorted descending.
inline std::vector<VocabEntry> build_entity_vocabulary(const std::vector<EntityLink>& links,
                                                       std::size_t min_sentences = 10,
                                                       std::size_t top_k = 30000) {
  std::map<std::string, std::set<std::string>> sentences;
  for (const auto& l : links) sentences[l.entity_id].insert(l.sentence_id);
  std::vector<VocabEntry> vocab;
  for (const auto& [id, s] : sentences) {
    if (s.size() >= min_sentences) vocab.push_back({id, s.size()});
  }
  std::sort(vocab.begin(), vocab.end(), [](const VocabEntry& a, const VocabEntry& b) {
    return a.sentence_count != b.sentence_count ? a.sentence_count > b.sentence_count : a.entity_id < b.entity_id;
  });
  if (vocab.size() > top_k) vocab.resize(top_k);
  return vocab;
}

}  // namespace scichal
