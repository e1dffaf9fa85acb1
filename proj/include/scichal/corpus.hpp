#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "scichal/digest.hpp"
#include "scichal/error.hpp"
#include "scichal/jsonl.hpp"

namespace scichal {

struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::optional<std::string> date;  // ISO-8601 (YYYY, YYYY-MM or YYYY-MM-DD)
  std::optional<std::string> url;
  std::optional<std::string> journal;
  std::vector<std::string> sentences;

  bool operator==(const PaperRecord&) const = default;
};

struct SentenceRecord {
  std::string sentence_id;
  std::string paper_id;
  std::int64_t position = 0;
  std::string text;
  std::optional<std::string> prev_text;
  std::optional<std::string> next_text;

  bool operator==(const SentenceRecord&) const = default;
};

struct LabelPair {
  bool challenge = false;
  bool direction = false;
  std::optional<double> challenge_prob;
  std::optional<double> direction_prob;

  bool operator==(const LabelPair&) const = default;
};

enum class Label { kChallenge, kDirection };

inline bool label_value(const LabelPair& p, Label label) {
  return label == Label::kChallenge ? p.challenge : p.direction;
}

inline std::optional<double> label_prob(const LabelPair& p, Label label) {
  return label == Label::kChallenge ? p.challenge_prob : p.direction_prob;
}

inline std::string_view label_name(Label label) {
  return label == Label::kChallenge ? "challenge" : "direction";
}

// One (challenge, direction) logit pair.
struct LogitPair {
  double challenge = 0.0;
  double direction = 0.0;

  bool operator==(const LogitPair&) const = default;
};

// Slices in model-runner order: l1 = sentence model on sentence,
// l2 = context model on context, l3 = sentence model on context,
// l4 = context model on sentence.
struct SliceLogits {
  std::string sentence_id;
  std::array<LogitPair, 4> slices{};

  bool operator==(const SliceLogits&) const = default;
};

// Identifier for a sentence: SHA-256 over paper_id, NUL, decimal position,
// NUL, text bytes. Stable across runs and platforms.
inline std::string make_sentence_id(std::string_view paper_id,
                                    std::int64_t position,
                                    std::string_view text) {
  if (paper_id.empty()) fail(ErrorCode::kValidation, "paper_id must be nonempty");
  if (position < 0) fail(ErrorCode::kValidation, "position must be >= 0");
  const std::string pos = std::to_string(position);
  Sha256 h;
  h.update(paper_id).update(std::string_view("\0", 1)).update(pos);
  h.update(std::string_view("\0", 1)).update(text);
  return h.hex();
}

struct Verdict {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks every invariant that can be decided from the record alone.
// Absence of next_text at the last sentence needs the paper length, so it
// is enforced by the producer (build_context_windows) instead.
inline Verdict validate_sentence_record(const SentenceRecord& rec) {
  Verdict v;
  if (rec.paper_id.empty()) v.violations.emplace_back("empty paper_id");
  if (rec.position < 0) v.violations.emplace_back("negative position");
  if (rec.text.find_first_not_of(" \t\r\n\f\v") == std::string::npos) {
    v.violations.emplace_back("empty text");
  }
  if (rec.position == 0 && rec.prev_text) {
    v.violations.emplace_back("prev_text present at position 0");
  }
  if (rec.position > 0 && !rec.prev_text) {
    v.violations.emplace_back("prev_text absent at position > 0");
  }
  if (rec.sentence_id.empty()) {
    v.violations.emplace_back("empty sentence_id");
  } else if (!rec.paper_id.empty() && rec.position >= 0 &&
             rec.sentence_id != make_sentence_id(rec.paper_id, rec.position, rec.text)) {
    v.violations.emplace_back("sentence_id does not match content");
  }
  return v;
}

inline bool is_iso_date(const std::string& s) {
  static const std::regex kDate(R"(^\d{4}(-(0[1-9]|1[0-2])(-(0[1-9]|[12]\d|3[01]))?)?$)");
  return std::regex_match(s, kDate);
}

// ---- JSON encodings (field names as in the type definitions) ----

inline json to_json(const PaperRecord& p) {
  return json{{"paper_id", p.paper_id},
              {"title", p.title},
              {"date", field::nullable(p.date)},
              {"url", field::nullable(p.url)},
              {"journal", field::nullable(p.journal)},
              {"sentences", p.sentences}};
}

inline PaperRecord paper_from_json(const json& j) {
  PaperRecord p;
  p.paper_id = field::string(j, "paper_id");
  if (p.paper_id.empty()) fail(ErrorCode::kSchema, "empty paper_id");
  p.title = field::optional_string(j, "title").value_or("");
  p.date = field::optional_string(j, "date");
  if (p.date && !is_iso_date(*p.date)) fail(ErrorCode::kSchema, "date is not ISO-8601: " + *p.date);
  p.url = field::optional_string(j, "url");
  p.journal = field::optional_string(j, "journal");
  const json& sents = field::required(j, "sentences");
  if (!sents.is_array()) fail(ErrorCode::kSchema, "sentences must be an array");
  for (const auto& s : sents) {
    if (!s.is_string()) fail(ErrorCode::kSchema, "sentences must hold strings");
    p.sentences.push_back(s.get<std::string>());
  }
  return p;
}

inline json to_json(const SentenceRecord& s) {
  return json{{"sentence_id", s.sentence_id},
              {"paper_id", s.paper_id},
              {"position", s.position},
              {"text", s.text},
              {"prev_text", field::nullable(s.prev_text)},
              {"next_text", field::nullable(s.next_text)}};
}

inline SentenceRecord sentence_from_json(const json& j) {
  SentenceRecord s;
  s.sentence_id = field::string(j, "sentence_id");
  s.paper_id = field::string(j, "paper_id");
  s.position = field::integer(j, "position");
  s.text = field::string(j, "text");
  s.prev_text = field::optional_string(j, "prev_text");
  s.next_text = field::optional_string(j, "next_text");
  return s;
}

inline json to_json(const LabelPair& l) {
  return json{{"challenge", l.challenge},
              {"direction", l.direction},
              {"challenge_prob", field::nullable(l.challenge_prob)},
              {"direction_prob", field::nullable(l.direction_prob)}};
}

inline void check_prob(const std::optional<double>& p, const char* name) {
  if (p && !(*p >= 0.0 && *p <= 1.0)) {
    fail(ErrorCode::kSchema, std::string(name) + " must be in [0,1]");
  }
}

inline LabelPair label_pair_from_json(const json& j) {
  LabelPair l;
  l.challenge = field::boolean(j, "challenge");
  l.direction = field::boolean(j, "direction");
  l.challenge_prob = field::optional_number(j, "challenge_prob");
  l.direction_prob = field::optional_number(j, "direction_prob");
  check_prob(l.challenge_prob, "challenge_prob");
  check_prob(l.direction_prob, "direction_prob");
  return l;
}

inline json to_json(const SliceLogits& s) {
  json j{{"sentence_id", s.sentence_id}};
  for (std::size_t i = 0; i < 4; ++i) {
    j["l" + std::to_string(i + 1)] = json::array({s.slices[i].challenge, s.slices[i].direction});
  }
  return j;
}

// Rejects records missing any slice, with a pair of the wrong arity, or
// holding a non-finite value.
inline SliceLogits slice_logits_from_json(const json& j) {
  SliceLogits s;
  s.sentence_id = field::string(j, "sentence_id");
  if (s.sentence_id.empty()) fail(ErrorCode::kSchema, "empty sentence_id");
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string key = "l" + std::to_string(i + 1);
    const json& pair = field::required(j, key.c_str());
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      fail(ErrorCode::kSchema, key + " must be a [challenge, direction] number pair");
    }
    s.slices[i] = {pair[0].get<double>(), pair[1].get<double>()};
    if (!std::isfinite(s.slices[i].challenge) || !std::isfinite(s.slices[i].direction)) {
      fail(ErrorCode::kSchema, key + " holds a non-finite logit");
    }
  }
  return s;
}

}  // namespace scichal
