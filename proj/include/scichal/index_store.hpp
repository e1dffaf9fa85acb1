#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scichal/corpus.hpp"
#include "scichal/digest.hpp"
#include "scichal/entity_linking.hpp"
#include "scichal/scoring.hpp"
#include "scichal/text.hpp"

namespace scichal {

inline constexpr int kSnapshotFormatVersion = 1;

struct PaperMeta {
  std::string paper_id;
  std::string title;
  std::optional<std::string> date;
  std::optional<std::string> url;
  std::optional<std::string> journal;

  bool operator==(const PaperMeta&) const = default;
};

struct IndexedSentence {
  SentenceRecord sentence;
  LabelPair decision;  // at the indexing thresholds, probabilities always set
  std::vector<std::string> entity_ids;  // sorted, vocabulary members only
  PaperMeta paper;

  double challenge_prob() const { return decision.challenge_prob.value_or(0.0); }
  double direction_prob() const { return decision.direction_prob.value_or(0.0); }

  bool operator==(const IndexedSentence&) const = default;
};

struct Posting {
  std::string sentence_id;
  double prob = 0.0;

  bool operator==(const Posting&) const = default;
};

struct EntityEntry {
  std::string entity_id;
  std::string name;
  std::size_t vocab_count = 0;    // distinct linked sentences corpus-wide
  std::size_t indexed_count = 0;  // indexed sentences linked to the entity
  std::vector<Posting> challenge;  // prob descending, then sentence_id
  std::vector<Posting> direction;

  bool operator==(const EntityEntry&) const = default;
};

struct CoEntry {
  std::string entity_id;
  std::size_t count = 0;

  bool operator==(const CoEntry&) const = default;
};

struct AliasEntry {
  std::string key;  // normalize_key(alias)
  std::string alias;
  std::string entity_id;

  bool operator==(const AliasEntry&) const = default;
};

struct BuildParams {
  double challenge_threshold = 0.99;
  double direction_threshold = 0.99;
  bool dedup_text = false;
  std::optional<std::size_t> vocab_min_sentences;
  std::optional<std::size_t> vocab_top_k;

  bool operator==(const BuildParams&) const = default;
};

struct Manifest {
  int format_version = kSnapshotFormatVersion;
  BuildParams params;
  std::size_t sentence_count = 0;
  std::size_t entity_count = 0;
  std::size_t challenge_sentences = 0;
  std::size_t direction_sentences = 0;
  std::size_t cooccurrence_pairs = 0;
  std::size_t alias_count = 0;
  std::string corpus_fingerprint;

  bool operator==(const Manifest&) const = default;
};

struct IndexSnapshot {
  Manifest manifest;
  std::map<std::string, IndexedSentence> sentences;
  std::map<std::string, EntityEntry> entities;
  std::map<std::string, std::vector<CoEntry>> cooccurrence;
  std::vector<AliasEntry> autocomplete;  // sorted by (key, entity_id)

  bool operator==(const IndexSnapshot&) const = default;
};

enum class LabelFilter { kChallenge, kDirection, kBoth };

inline LabelFilter parse_label_filter(std::string_view s) {
  if (s == "challenge") return LabelFilter::kChallenge;
  if (s == "direction") return LabelFilter::kDirection;
  if (s == "both") return LabelFilter::kBoth;
  fail(ErrorCode::kValidation, "label must be one of challenge, direction, both");
}

// ---------------------------------------------------------------------------
// Build

namespace detail {

inline bool posting_order(const Posting& a, const Posting& b) {
  return a.prob != b.prob ? a.prob > b.prob : a.sentence_id < b.sentence_id;
}

inline bool co_order(const CoEntry& a, const CoEntry& b) {
  return a.count != b.count ? a.count > b.count : a.entity_id < b.entity_id;
}

}  // namespace detail

struct BuildInputs {
  std::vector<ScoredSentence> scored;
  std::vector<EntityLink> links;
  std::vector<VocabEntry> vocab;
  std::vector<SentenceRecord> sentences;
  std::vector<PaperRecord> papers;  // metadata; sentence lists are not needed
  std::vector<KbEntity> kb;         // optional, supplies names and aliases
};

// Keeps sentences whose challenge or direction probability reaches its
// threshold. A scorer without probabilities counts as 1.0/0.0 from its
// boolean decision. Links and scores naming unknown sentences are skipped
// with a warning. Output depends only on the inputs.
inline IndexSnapshot build_index(const BuildInputs& in, const BuildParams& params,
                                 std::vector<std::string>* warnings = nullptr) {
  for (double t : {params.challenge_threshold, params.direction_threshold}) {
    if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::kValidation, "index thresholds must be in (0,1)");
  }
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  std::map<std::string, const SentenceRecord*> by_id;
  for (const auto& s : in.sentences) by_id[s.sentence_id] = &s;
  std::map<std::string, const PaperRecord*> papers;
  for (const auto& p : in.papers) papers[p.paper_id] = &p;
  std::map<std::string, std::size_t> vocab;
  for (const auto& v : in.vocab) vocab[v.entity_id] = v.sentence_count;
  std::map<std::string, const KbEntity*> kb;
  for (const auto& e : in.kb) kb[e.entity_id] = &e;

  IndexSnapshot idx;
  idx.manifest.params = params;

  {
    std::vector<std::string> ids;
    for (const auto& s : in.sentences) ids.push_back(s.sentence_id);
    std::sort(ids.begin(), ids.end());
    Sha256 h;
    for (const auto& id : ids) h.update(id).update("\n");
    idx.manifest.corpus_fingerprint = h.hex();
  }

  std::map<std::string, std::string> dedup_owner;  // text key -> sentence_id
  for (const auto& sc : in.scored) {
    auto it = by_id.find(sc.sentence_id);
    if (it == by_id.end()) {
      warn("score for unknown sentence " + sc.sentence_id + " skipped");
      continue;
    }
    const double pc = sc.decision.challenge_prob.value_or(sc.decision.challenge ? 1.0 : 0.0);
    const double pd = sc.decision.direction_prob.value_or(sc.decision.direction ? 1.0 : 0.0);
    const bool c = pc >= params.challenge_threshold;
    const bool d = pd >= params.direction_threshold;
    if (!c && !d) continue;

    IndexedSentence is;
    is.sentence = *it->second;
    is.decision = LabelPair{c, d, pc, pd};
    if (auto p = papers.find(is.sentence.paper_id); p != papers.end()) {
      is.paper = PaperMeta{p->second->paper_id, p->second->title, p->second->date, p->second->url,
                           p->second->journal};
    } else {
      is.paper.paper_id = is.sentence.paper_id;
    }

    if (params.dedup_text) {
      const std::string key = text::normalize_key(is.sentence.text);
      auto [owner, inserted] = dedup_owner.emplace(key, sc.sentence_id);
      if (!inserted) {
        const auto& prev = idx.sentences.at(owner->second);
        const double mine = std::max(pc, pd);
        const double theirs = std::max(prev.challenge_prob(), prev.direction_prob());
        if (mine < theirs || (mine == theirs && sc.sentence_id > owner->second)) continue;
        idx.sentences.erase(owner->second);
        owner->second = sc.sentence_id;
      }
    }
    idx.sentences[sc.sentence_id] = std::move(is);
  }

  std::map<std::string, std::set<std::string>> surfaces;
  for (const auto& l : in.links) {
    if (!by_id.count(l.sentence_id)) {
      warn("link for unknown sentence " + l.sentence_id + " skipped");
      continue;
    }
    if (!vocab.count(l.entity_id)) continue;
    if (!l.surface.empty()) surfaces[l.entity_id].insert(l.surface);
    auto it = idx.sentences.find(l.sentence_id);
    if (it == idx.sentences.end()) continue;
    it->second.entity_ids.push_back(l.entity_id);
  }

  for (const auto& [id, count] : vocab) {
    EntityEntry e;
    e.entity_id = id;
    e.vocab_count = count;
    if (auto k = kb.find(id); k != kb.end() && !k->second->canonical_name.empty()) {
      e.name = k->second->canonical_name;
    } else if (auto s = surfaces.find(id); s != surfaces.end()) {
      e.name = *s->second.begin();
    } else {
      e.name = id;
    }
    idx.entities[id] = std::move(e);
  }

  std::map<std::pair<std::string, std::string>, std::size_t> pairs;
  for (auto& [sid, s] : idx.sentences) {
    auto& ents = s.entity_ids;
    std::sort(ents.begin(), ents.end());
    ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
    for (const auto& eid : ents) {
      auto& e = idx.entities.at(eid);
      ++e.indexed_count;
      if (s.decision.challenge) e.challenge.push_back({sid, s.challenge_prob()});
      if (s.decision.direction) e.direction.push_back({sid, s.direction_prob()});
    }
    for (std::size_t i = 0; i < ents.size(); ++i) {
      for (std::size_t j = i + 1; j < ents.size(); ++j) ++pairs[{ents[i], ents[j]}];
    }
    if (s.decision.challenge) ++idx.manifest.challenge_sentences;
    if (s.decision.direction) ++idx.manifest.direction_sentences;
  }
  for (auto& [_, e] : idx.entities) {
    std::sort(e.challenge.begin(), e.challenge.end(), detail::posting_order);
    std::sort(e.direction.begin(), e.direction.end(), detail::posting_order);
  }
  for (const auto& [p, n] : pairs) {
    idx.cooccurrence[p.first].push_back({p.second, n});
    idx.cooccurrence[p.second].push_back({p.first, n});
  }
  for (auto& [_, list] : idx.cooccurrence) std::sort(list.begin(), list.end(), detail::co_order);

  // Autocomplete covers entities that lead to at least one indexed sentence.
  std::set<std::pair<std::string, std::string>> seen;  // (key, entity_id)
  for (const auto& [id, e] : idx.entities) {
    if (e.indexed_count == 0) continue;
    std::vector<std::string> names;
    if (auto k = kb.find(id); k != kb.end()) {
      names.push_back(k->second->canonical_name);
      names.insert(names.end(), k->second->aliases.begin(), k->second->aliases.end());
    }
    if (auto s = surfaces.find(id); s != surfaces.end()) names.insert(names.end(), s->second.begin(), s->second.end());
    if (names.empty()) names.push_back(e.name);
    for (const auto& n : names) {
      std::string key = text::normalize_key(n);
      if (key.empty() || !seen.emplace(key, id).second) continue;
      idx.autocomplete.push_back({std::move(key), n, id});
    }
  }
  std::sort(idx.autocomplete.begin(), idx.autocomplete.end(), [](const AliasEntry& a, const AliasEntry& b) {
    return a.key != b.key ? a.key < b.key : a.entity_id < b.entity_id;
  });

  idx.manifest.sentence_count = idx.sentences.size();
  idx.manifest.entity_count = idx.entities.size();
  idx.manifest.cooccurrence_pairs = pairs.size();
  idx.manifest.alias_count = idx.autocomplete.size();
  return idx;
}

// ---------------------------------------------------------------------------
// Queries

struct QueryPage {
  std::size_t total = 0;
  std::size_t offset = 0;
  std::size_t limit = 0;
  std::vector<const IndexedSentence*> items;
};

inline const EntityEntry& require_entity(const IndexSnapshot& idx, const std::string& id) {
  auto it = idx.entities.find(id);
  if (it == idx.entities.end()) fail(ErrorCode::kNotFound, "unknown entity " + id);
  return it->second;
}

// Sentences linked to every requested entity and carrying the label.
// "both" takes either label and ranks by the larger probability. Ranking is
// by probability descending, then sentence_id.
inline QueryPage query(const IndexSnapshot& idx, std::vector<std::string> entities, LabelFilter label,
                       std::size_t offset, std::size_t limit) {
  if (entities.empty()) fail(ErrorCode::kValidation, "query needs at least one entity");
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  std::vector<const EntityEntry*> ents;
  for (const auto& id : entities) ents.push_back(&require_entity(idx, id));

  // Drive from the entity with the fewest indexed sentences.
  const EntityEntry* driver = *std::min_element(ents.begin(), ents.end(), [](const auto* a, const auto* b) {
    return a->indexed_count < b->indexed_count;
  });
  std::vector<std::pair<double, const IndexedSentence*>> hits;
  auto consider = [&](const std::string& sid) {
    const IndexedSentence& s = idx.sentences.at(sid);
    for (const auto& id : entities) {
      if (!std::binary_search(s.entity_ids.begin(), s.entity_ids.end(), id)) return;
    }
    double score = 0;
    switch (label) {
      case LabelFilter::kChallenge: score = s.challenge_prob(); break;
      case LabelFilter::kDirection: score = s.direction_prob(); break;
      case LabelFilter::kBoth: score = std::max(s.challenge_prob(), s.direction_prob()); break;
    }
    hits.emplace_back(score, &s);
  };
  if (label != LabelFilter::kDirection) {
    for (const auto& p : driver->challenge) consider(p.sentence_id);
  }
  if (label != LabelFilter::kChallenge) {
    for (const auto& p : driver->direction) {
      if (label == LabelFilter::kBoth && idx.sentences.at(p.sentence_id).decision.challenge) continue;
      consider(p.sentence_id);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second->sentence.sentence_id < b.second->sentence.sentence_id;
  });

  QueryPage page;
  page.total = hits.size();
  page.offset = offset;
  page.limit = limit;
  for (std::size_t i = offset; i < hits.size() && page.items.size() < limit; ++i) page.items.push_back(hits[i].second);
  return page;
}

inline std::vector<CoEntry> cooccurring(const IndexSnapshot& idx, const std::string& entity_id,
                                        std::size_t limit = 0) {
  require_entity(idx, entity_id);
  auto it = idx.cooccurrence.find(entity_id);
  if (it == idx.cooccurrence.end()) return {};
  std::vector<CoEntry> out = it->second;
  if (limit && out.size() > limit) out.resize(limit);
  return out;
}

struct Suggestion {
  std::string alias;
  std::string entity_id;
  std::size_t sentence_count = 0;

  bool operator==(const Suggestion&) const = default;
};

// Case- and punctuation-insensitive prefix match over aliases. One
// suggestion per entity (its shortest matching alias), ranked by the
// entity's indexed sentence count, then entity_id.
inline std::vector<Suggestion> autocomplete(const IndexSnapshot& idx, std::string_view prefix, std::size_t limit = 10) {
  if (prefix.empty()) fail(ErrorCode::kValidation, "autocomplete prefix must be nonempty");
  const std::string key = text::normalize_key(prefix);
  if (key.empty()) return {};
  auto first = std::lower_bound(idx.autocomplete.begin(), idx.autocomplete.end(), key,
                                [](const AliasEntry& e, const std::string& k) { return e.key < k; });
  std::map<std::string, const AliasEntry*> best;
  for (auto it = first; it != idx.autocomplete.end() && text::starts_with(it->key, key); ++it) {
    auto [slot, inserted] = best.emplace(it->entity_id, &*it);
    if (!inserted && it->key.size() < slot->second->key.size()) slot->second = &*it;
  }
  std::vector<Suggestion> out;
  for (const auto& [id, e] : best) out.push_back({e->alias, id, idx.entities.at(id).indexed_count});
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    return a.sentence_count != b.sentence_count ? a.sentence_count > b.sentence_count : a.entity_id < b.entity_id;
  });
  if (limit && out.size() > limit) out.resize(limit);
  return out;
}

// ---------------------------------------------------------------------------
// JSON encodings of snapshot parts

inline json to_json(const PaperMeta& p) {
  return json{{"paper_id", p.paper_id}, {"title", p.title}, {"date", field::nullable(p.date)},
              {"url", field::nullable(p.url)}, {"journal", field::nullable(p.journal)}};
}

inline PaperMeta paper_meta_from_json(const json& j) {
  return PaperMeta{field::string(j, "paper_id"), field::string(j, "title"), field::optional_string(j, "date"),
                   field::optional_string(j, "url"), field::optional_string(j, "journal")};
}

inline json to_json(const IndexedSentence& s) {
  return json{{"sentence", to_json(s.sentence)}, {"decision", to_json(s.decision)},
              {"entity_ids", s.entity_ids}, {"paper", to_json(s.paper)}};
}

inline IndexedSentence indexed_sentence_from_json(const json& j) {
  IndexedSentence s;
  s.sentence = sentence_from_json(field::required(j, "sentence"));
  s.decision = label_pair_from_json(field::required(j, "decision"));
  s.entity_ids = field::required(j, "entity_ids").get<std::vector<std::string>>();
  s.paper = paper_meta_from_json(field::required(j, "paper"));
  return s;
}

inline json to_json(const BuildParams& p) {
  return json{{"challenge_threshold", p.challenge_threshold},
              {"direction_threshold", p.direction_threshold},
              {"dedup_text", p.dedup_text},
              {"vocab_min_sentences", p.vocab_min_sentences ? json(*p.vocab_min_sentences) : json(nullptr)},
              {"vocab_top_k", p.vocab_top_k ? json(*p.vocab_top_k) : json(nullptr)}};
}

inline BuildParams build_params_from_json(const json& j) {
  BuildParams p;
  p.challenge_threshold = field::number(j, "challenge_threshold");
  p.direction_threshold = field::number(j, "direction_threshold");
  p.dedup_text = field::boolean(j, "dedup_text");
  if (const auto& v = j.at("vocab_min_sentences"); !v.is_null()) p.vocab_min_sentences = v.get<std::size_t>();
  if (const auto& v = j.at("vocab_top_k"); !v.is_null()) p.vocab_top_k = v.get<std::size_t>();
  return p;
}

inline json to_json(const Manifest& m) {
  return json{{"format_version", m.format_version},
              {"params", to_json(m.params)},
              {"sentence_count", m.sentence_count},
              {"entity_count", m.entity_count},
              {"challenge_sentences", m.challenge_sentences},
              {"direction_sentences", m.direction_sentences},
              {"cooccurrence_pairs", m.cooccurrence_pairs},
              {"alias_count", m.alias_count},
              {"corpus_fingerprint", m.corpus_fingerprint}};
}

inline Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.format_version = j.at("format_version").get<int>();
  m.params = build_params_from_json(j.at("params"));
  m.sentence_count = j.at("sentence_count").get<std::size_t>();
  m.entity_count = j.at("entity_count").get<std::size_t>();
  m.challenge_sentences = j.at("challenge_sentences").get<std::size_t>();
  m.direction_sentences = j.at("direction_sentences").get<std::size_t>();
  m.cooccurrence_pairs = j.at("cooccurrence_pairs").get<std::size_t>();
  m.alias_count = j.at("alias_count").get<std::size_t>();
  m.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
  return m;
}

namespace detail {

inline json postings_json(const std::vector<Posting>& v) {
  json a = json::array();
  for (const auto& p : v) a.push_back(json::array({p.sentence_id, p.prob}));
  return a;
}

inline std::vector<Posting> postings_from_json(const json& a) {
  std::vector<Posting> v;
  for (const auto& p : a) v.push_back({p.at(0).get<std::string>(), p.at(1).get<double>()});
  return v;
}

inline const char kSnapshotMagic[] = "SCICHAL-SNAPSHOT\n";

// Section payloads in table-of-contents order.
inline std::vector<std::pair<std::string, std::string>> encode_sections(const IndexSnapshot& idx) {
  json sentences = json::array();
  for (const auto& [_, s] : idx.sentences) sentences.push_back(to_json(s));
  json entities = json::array();
  for (const auto& [_, e] : idx.entities) {
    entities.push_back(json{{"entity_id", e.entity_id}, {"name", e.name}, {"vocab_count", e.vocab_count},
                            {"indexed_count", e.indexed_count}, {"challenge", postings_json(e.challenge)},
                            {"direction", postings_json(e.direction)}});
  }
  json co = json::object();
  for (const auto& [id, list] : idx.cooccurrence) {
    json a = json::array();
    for (const auto& c : list) a.push_back(json::array({c.entity_id, c.count}));
    co[id] = a;
  }
  json ac = json::array();
  for (const auto& a : idx.autocomplete) ac.push_back(json::array({a.key, a.alias, a.entity_id}));
  return {{"manifest", to_json(idx.manifest).dump()},
          {"sentences", sentences.dump()},
          {"entities", entities.dump()},
          {"cooccurrence", co.dump()},
          {"autocomplete", ac.dump()}};
}

}  // namespace detail

// Single-file layout: magic line, 20-digit header length line, header JSON
// (format version, table of contents with per-section offset/length/sha256,
// overall fingerprint), then the section payloads back to back.
inline std::string serialize_snapshot(const IndexSnapshot& idx) {
  const auto sections = detail::encode_sections(idx);
  json toc = json::array();
  std::size_t offset = 0;
  Sha256 fingerprint;
  for (const auto& [name, payload] : sections) {
    const std::string digest = sha256_hex(payload);
    fingerprint.update(name).update(":").update(digest).update("\n");
    toc.push_back(json{{"name", name}, {"offset", offset}, {"length", payload.size()}, {"sha256", digest}});
    offset += payload.size();
  }
  const json header{{"format_version", idx.manifest.format_version},
                    {"sections", toc},
                    {"fingerprint", fingerprint.hex()}};
  const std::string header_text = header.dump() + "\n";
  char len_line[32];
  std::snprintf(len_line, sizeof len_line, "%020zu\n", header_text.size());
  std::string out = detail::kSnapshotMagic;
  out += len_line;
  out += header_text;
  for (const auto& [_, payload] : sections) out += payload;
  return out;
}

inline IndexSnapshot deserialize_snapshot(std::string_view bytes) {
  const std::string_view magic = detail::kSnapshotMagic;
  if (bytes.size() < magic.size() + 21 || bytes.substr(0, magic.size()) != magic) {
    fail(ErrorCode::kCorruption, "not a snapshot file (bad magic or truncated header)");
  }
  std::size_t pos = magic.size();
  const std::string_view len_line = bytes.substr(pos, 21);
  if (len_line.back() != '\n' || len_line.substr(0, 20).find_first_not_of("0123456789") != std::string_view::npos) {
    fail(ErrorCode::kCorruption, "malformed snapshot header length");
  }
  const std::size_t header_len = std::stoull(std::string(len_line.substr(0, 20)));
  pos += 21;
  if (header_len > bytes.size() - pos) fail(ErrorCode::kCorruption, "snapshot truncated inside header");

  json header;
  try {
    header = json::parse(bytes.substr(pos, header_len));
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruption, std::string("unreadable snapshot header: ") + e.what());
  }
  pos += header_len;
  if (!header.is_object() || !header.contains("format_version") || !header["format_version"].is_number_integer()) {
    fail(ErrorCode::kCorruption, "snapshot header lacks format_version");
  }
  const int version = header["format_version"].get<int>();
  if (version != kSnapshotFormatVersion) {
    fail(ErrorCode::kVersion, "snapshot format version " + std::to_string(version) + " unsupported (expected " +
                                  std::to_string(kSnapshotFormatVersion) + ")");
  }

  try {
    std::map<std::string, std::string_view> payloads;
    Sha256 fingerprint;
    const std::string_view body = bytes.substr(pos);
    std::size_t expected_end = 0;
    for (const auto& entry : header.at("sections")) {
      const auto name = entry.at("name").get<std::string>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      if (offset != expected_end || length > body.size() || offset > body.size() - length) {
        fail(ErrorCode::kCorruption, "snapshot truncated in section " + name);
      }
      expected_end = offset + length;
      const std::string_view payload = body.substr(offset, length);
      const std::string digest = sha256_hex(payload);
      if (digest != entry.at("sha256").get<std::string>()) {
        fail(ErrorCode::kCorruption, "checksum mismatch in section " + name);
      }
      fingerprint.update(name).update(":").update(digest).update("\n");
      payloads[name] = payload;
    }
    if (expected_end != body.size()) fail(ErrorCode::kCorruption, "trailing bytes after snapshot sections");
    if (fingerprint.hex() != header.at("fingerprint").get<std::string>()) {
      fail(ErrorCode::kCorruption, "snapshot fingerprint mismatch");
    }
    for (const char* name : {"manifest", "sentences", "entities", "cooccurrence", "autocomplete"}) {
      if (!payloads.count(name)) fail(ErrorCode::kCorruption, std::string("snapshot lacks section ") + name);
    }

    IndexSnapshot idx;
    idx.manifest = manifest_from_json(json::parse(payloads["manifest"]));
    if (idx.manifest.format_version != version) {
      fail(ErrorCode::kVersion, "manifest format version " + std::to_string(idx.manifest.format_version) +
                                    " disagrees with header");
    }
    for (const auto& s : json::parse(payloads["sentences"])) {
      auto rec = indexed_sentence_from_json(s);
      idx.sentences[rec.sentence.sentence_id] = std::move(rec);
    }
    for (const auto& e : json::parse(payloads["entities"])) {
      EntityEntry entry;
      entry.entity_id = e.at("entity_id").get<std::string>();
      entry.name = e.at("name").get<std::string>();
      entry.vocab_count = e.at("vocab_count").get<std::size_t>();
      entry.indexed_count = e.at("indexed_count").get<std::size_t>();
      entry.challenge = detail::postings_from_json(e.at("challenge"));
      entry.direction = detail::postings_from_json(e.at("direction"));
      idx.entities[entry.entity_id] = std::move(entry);
    }
    const json co = json::parse(payloads["cooccurrence"]);
    for (const auto& [id, list] : co.items()) {
      auto& dst = idx.cooccurrence[id];
      for (const auto& c : list) dst.push_back({c.at(0).get<std::string>(), c.at(1).get<std::size_t>()});
    }
    for (const auto& a : json::parse(payloads["autocomplete"])) {
      idx.autocomplete.push_back({a.at(0).get<std::string>(), a.at(1).get<std::string>(), a.at(2).get<std::string>()});
    }
    return idx;
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruption, std::string("undecodable snapshot section: ") + e.what());
  }
}

// Writes to a sibling temporary file and renames it into place.
inline void persist(const IndexSnapshot& idx, const std::string& path) {
  const std::string bytes = serialize_snapshot(idx);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIo, "cannot move snapshot into place: " + ec.message());
}

inline IndexSnapshot load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open snapshot " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_snapshot(bytes);
}

}  // namespace scichal
