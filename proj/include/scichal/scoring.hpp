#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scichal/corpus.hpp"
#include "scichal/lexicon.hpp"

namespace scichal {

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Output of any scorer. Baselines leave `combined_logits` empty and may
// leave the probabilities in `decision` empty too.
struct ScoredSentence {
  std::string sentence_id;
  std::optional<LogitPair> combined_logits;
  LabelPair decision;

  bool operator==(const ScoredSentence&) const = default;
};

inline json to_json(const ScoredSentence& s) {
  json j = to_json(s.decision);
  j["sentence_id"] = s.sentence_id;
  j["challenge_logit"] = s.combined_logits ? json(s.combined_logits->challenge) : json(nullptr);
  j["direction_logit"] = s.combined_logits ? json(s.combined_logits->direction) : json(nullptr);
  return j;
}

inline ScoredSentence scored_from_json(const json& j) {
  ScoredSentence s;
  s.sentence_id = field::string(j, "sentence_id");
  s.decision = label_pair_from_json(j);
  auto c = field::optional_number(j, "challenge_logit");
  auto d = field::optional_number(j, "direction_logit");
  if (c.has_value() != d.has_value()) fail(ErrorCode::kSchema, "logits must be both present or both absent");
  if (c) s.combined_logits = LogitPair{*c, *d};
  return s;
}

// ---------------------------------------------------------------------------
// Keyword and polarity baselines

inline LabelPair keyword_score(std::string_view sentence, const KeywordLexicon& lex) {
  const auto hits = lexicon_match(sentence, lex);
  return LabelPair{!hits.challenge.empty(), !hits.direction.empty(), std::nullopt, std::nullopt};
}

inline LabelPair keyword_score(const SentenceRecord& s, const KeywordLexicon& lex) {
  return keyword_score(s.text, lex);
}

// Word -> valence in [-1, 1]. Lookups use lowercased word tokens.
using PolarityLexicon = std::unordered_map<std::string, double>;

// Small general-purpose valence list; a fuller list can be loaded from a
// "word<TAB>valence" file.
inline const PolarityLexicon& default_polarity_lexicon() {
  static const PolarityLexicon kLexicon{
      {"bad", -0.7},        {"poor", -0.4},       {"worse", -0.4},      {"worst", -1.0},
      {"difficult", -0.5},  {"hard", -0.3},       {"unclear", -0.3},    {"unknown", -0.1},
      {"fail", -0.5},       {"failed", -0.5},     {"failure", -0.5},    {"failures", -0.5},
      {"problem", -0.4},    {"problems", -0.4},   {"problematic", -0.5}, {"limited", -0.1},
      {"lack", -0.3},       {"lacking", -0.3},    {"severe", -0.6},     {"negative", -0.3},
      {"wrong", -0.5},      {"risk", -0.2},       {"harmful", -0.6},    {"challenging", -0.3},
      {"impossible", -0.7}, {"inadequate", -0.5}, {"insufficient", -0.4}, {"flawed", -0.6},
      {"good", 0.7},        {"better", 0.5},      {"best", 1.0},        {"great", 0.8},
      {"promising", 0.6},   {"effective", 0.6},   {"successful", 0.75}, {"positive", 0.23},
      {"important", 0.4},   {"interesting", 0.5}, {"novel", 0.3},       {"useful", 0.3},
      {"potential", 0.2},   {"significant", 0.38}, {"improved", 0.4},    {"robust", 0.4},
      {"clear", 0.1},       {"encouraging", 0.5}, {"valuable", 0.5},    {"beneficial", 0.6},
      {"future", 0.0},      {"further", 0.0}};
  return kLexicon;
}

inline PolarityLexicon parse_polarity_lexicon(std::istream& in) {
  PolarityLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorCode::kSchema, "expected word<TAB>valence", line_no);
    double v = 0;
    try {
      v = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::kSchema, "valence is not a number", line_no);
    }
    if (!(v >= -1.0 && v <= 1.0)) fail(ErrorCode::kSchema, "valence must be in [-1,1]", line_no);
    lex[text::lower(line.substr(0, tab))] = v;
  }
  return lex;
}

// Mean valence over the tokens found in the lexicon; 0 when none are.
inline double polarity(std::string_view sentence, const PolarityLexicon& lex) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& w : text::word_tokens(sentence)) {
    if (auto it = lex.find(w); it != lex.end()) {
      sum += it->second;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

inline LabelPair polarity_score(std::string_view sentence, const PolarityLexicon& lex,
                                double neg_threshold, double pos_threshold) {
  if (!(neg_threshold <= 0.0 && 0.0 <= pos_threshold)) {
    fail(ErrorCode::kValidation, "polarity thresholds must satisfy neg <= 0 <= pos");
  }
  const double p = polarity(sentence, lex);
  return LabelPair{p <= neg_threshold, p >= pos_threshold, std::nullopt, std::nullopt};
}

inline LabelPair polarity_score(const SentenceRecord& s, const PolarityLexicon& lex,
                                double neg_threshold, double pos_threshold) {
  return polarity_score(s.text, lex, neg_threshold, pos_threshold);
}

// ---------------------------------------------------------------------------
// Zero-shot sub-label thresholding

inline const std::vector<std::string>& default_challenge_sublabels() {
  static const std::vector<std::string> kLabels{"challenge", "problem", "difficulty", "flaw",
                                                "limitation", "failure", "lack of clarity",
                                                "gap of knowledge"};
  return kLabels;
}

inline const std::vector<std::string>& default_direction_sublabels() {
  static const std::vector<std::string> kLabels{"direction", "suggestion", "hypothesis",
                                                "need for further research", "open question",
                                                "future work"};
  return kLabels;
}

struct ZeroShotScores {
  std::string sentence_id;
  std::map<std::string, double> challenge_sublabel_probs;
  std::map<std::string, double> direction_sublabel_probs;

  bool operator==(const ZeroShotScores&) const = default;
};

inline json to_json(const ZeroShotScores& z) {
  return json{{"sentence_id", z.sentence_id},
              {"challenge_sublabel_probs", z.challenge_sublabel_probs},
              {"direction_sublabel_probs", z.direction_sublabel_probs}};
}

inline ZeroShotScores zeroshot_from_json(const json& j) {
  ZeroShotScores z;
  z.sentence_id = field::string(j, "sentence_id");
  auto read = [&](const char* key, std::map<std::string, double>& dst) {
    const json& m = field::required(j, key);
    if (!m.is_object() || m.empty()) fail(ErrorCode::kSchema, std::string(key) + " must be a nonempty object");
    for (const auto& [label, p] : m.items()) {
      if (!p.is_number()) fail(ErrorCode::kSchema, std::string(key) + "." + label + " must be a number");
      const double v = p.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::kSchema, std::string(key) + "." + label + " must be in [0,1]");
      dst[label] = v;
    }
  };
  read("challenge_sublabel_probs", z.challenge_sublabel_probs);
  read("direction_sublabel_probs", z.direction_sublabel_probs);
  return z;
}

// m = max sub-label probability per set; positive iff m >= threshold.
inline LabelPair zeroshot_decide(const ZeroShotScores& z, double threshold = 0.9) {
  auto max_of = [](const std::map<std::string, double>& m, const char* which) {
    if (m.empty()) fail(ErrorCode::kValidation, std::string(which) + " sub-label map is empty");
    double best = 0;
    for (const auto& [label, p] : m) {
      if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kValidation, "sub-label probability outside [0,1]: " + label);
      best = std::max(best, p);
    }
    return best;
  };
  const double mc = max_of(z.challenge_sublabel_probs, "challenge");
  const double md = max_of(z.direction_sublabel_probs, "direction");
  return LabelPair{mc >= threshold, md >= threshold, mc, md};
}

// Keeps only the configured sub-labels; every configured label must be
// present in the score record.
inline ZeroShotScores restrict_sublabels(const ZeroShotScores& z,
                                         const std::vector<std::string>& challenge,
                                         const std::vector<std::string>& direction) {
  ZeroShotScores out{z.sentence_id, {}, {}};
  auto pick = [&](const std::map<std::string, double>& src, const std::vector<std::string>& labels,
                  std::map<std::string, double>& dst) {
    if (labels.empty()) fail(ErrorCode::kValidation, "sub-label set must be nonempty");
    for (const auto& l : labels) {
      auto it = src.find(l);
      if (it == src.end()) fail(ErrorCode::kValidation, "sentence " + z.sentence_id + " lacks sub-label '" + l + "'");
      dst[l] = it->second;
    }
  };
  pick(z.challenge_sublabel_probs, challenge, out.challenge_sublabel_probs);
  pick(z.direction_sublabel_probs, direction, out.direction_sublabel_probs);
  return out;
}

// ---------------------------------------------------------------------------
// Slice-Combine

struct CombineStrategy {
  enum class Kind { kMean, kMedian, kMajorityVote, kLogOddsExtremize };
  Kind kind = Kind::kMean;
  double alpha = 2.0;  // extremization factor, used by kLogOddsExtremize

  static CombineStrategy mean() { return {Kind::kMean, 2.0}; }
  static CombineStrategy median() { return {Kind::kMedian, 2.0}; }
  static CombineStrategy majority_vote() { return {Kind::kMajorityVote, 2.0}; }
  static CombineStrategy logodds_extremize(double alpha = 2.0) { return {Kind::kLogOddsExtremize, alpha}; }

  static CombineStrategy parse(std::string_view name, double alpha = 2.0) {
    if (name == "mean") return mean();
    if (name == "median") return median();
    if (name == "majority_vote") return majority_vote();
    if (name == "logodds_extremize") return logodds_extremize(alpha);
    fail(ErrorCode::kValidation, "unknown combine strategy '" + std::string(name) + "'");
  }

  std::string_view name() const {
    switch (kind) {
      case Kind::kMean: return "mean";
      case Kind::kMedian: return "median";
      case Kind::kMajorityVote: return "majority_vote";
      case Kind::kLogOddsExtremize: return "logodds_extremize";
    }
    return "mean";
  }
};

// Which of l1..l4 take part in the combination.
using SliceMask = std::array<bool, 4>;
inline constexpr SliceMask kAllSlices{true, true, true, true};
inline constexpr SliceMask kDirectSlices{true, true, false, false};   // l1, l2
inline constexpr SliceMask kCrossedSlices{false, false, true, true};  // l3, l4

inline SliceMask parse_slice_mask(std::string_view s) {
  if (s == "all" || s == "1234") return kAllSlices;
  SliceMask m{false, false, false, false};
  for (char c : s) {
    if (c < '1' || c > '4') fail(ErrorCode::kValidation, "slice mask must list digits 1-4, got '" + std::string(s) + "'");
    m[static_cast<std::size_t>(c - '1')] = true;
  }
  if (m == SliceMask{false, false, false, false}) fail(ErrorCode::kValidation, "slice mask selects no slices");
  return m;
}

namespace detail {

// Pairwise summation: equal inputs average back to themselves exactly.
inline double pairwise_mean(const std::vector<double>& v) {
  std::vector<double> level = v;
  while (level.size() > 1) {
    std::vector<double> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(level[i] + level[i + 1]);
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
  return level.front() / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// A slice votes positive iff its logit is strictly > 0. The combined logit
// is the mean over the winning side; a tied vote falls back to the mean of
// all selected slices.
inline double majority_vote(const std::vector<double>& v) {
  std::vector<double> pos, neg;
  for (double x : v) (x > 0 ? pos : neg).push_back(x);
  if (pos.size() > neg.size()) return pairwise_mean(pos);
  if (neg.size() > pos.size()) return pairwise_mean(neg);
  return pairwise_mean(v);
}

inline double combine_values(const std::vector<double>& v, const CombineStrategy& strategy) {
  switch (strategy.kind) {
    case CombineStrategy::Kind::kMean: return pairwise_mean(v);
    case CombineStrategy::Kind::kMedian: return median(v);
    case CombineStrategy::Kind::kMajorityVote: return majority_vote(v);
    case CombineStrategy::Kind::kLogOddsExtremize: return strategy.alpha * pairwise_mean(v);
  }
  return pairwise_mean(v);
}

}  // namespace detail

// Combines the selected slices per label independently, then derives
// probabilities with the logistic function. The attached decision uses a
// 0.5 threshold; call decide() for other thresholds.
inline ScoredSentence slice_combine(const SliceLogits& s, const CombineStrategy& strategy,
                                    const SliceMask& mask = kAllSlices) {
  if (strategy.kind == CombineStrategy::Kind::kLogOddsExtremize && !(strategy.alpha > 1.0)) {
    fail(ErrorCode::kValidation, "extremization alpha must be > 1");
  }
  std::vector<double> c, d;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(s.slices[i].challenge) || !std::isfinite(s.slices[i].direction)) {
      fail(ErrorCode::kValidation, "non-finite logit in slice l" + std::to_string(i + 1) + " of " + s.sentence_id);
    }
    if (!mask[i]) continue;
    c.push_back(s.slices[i].challenge);
    d.push_back(s.slices[i].direction);
  }
  if (c.empty()) fail(ErrorCode::kValidation, "slice mask selects no slices");

  ScoredSentence out;
  out.sentence_id = s.sentence_id;
  out.combined_logits = LogitPair{detail::combine_values(c, strategy), detail::combine_values(d, strategy)};
  const double pc = logistic(out.combined_logits->challenge);
  const double pd = logistic(out.combined_logits->direction);
  out.decision = LabelPair{pc >= 0.5, pd >= 0.5, pc, pd};
  return out;
}

// Inclusive per-label thresholds; both labels may be true. A missing
// probability keeps the scorer's own boolean decision.
inline LabelPair decide(const ScoredSentence& scored, double challenge_threshold,
                        double direction_threshold) {
  for (double t : {challenge_threshold, direction_threshold}) {
    if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::kValidation, "decision thresholds must be in (0,1)");
  }
  LabelPair out = scored.decision;
  if (out.challenge_prob) out.challenge = *out.challenge_prob >= challenge_threshold;
  if (out.direction_prob) out.direction = *out.direction_prob >= direction_threshold;
  return out;
}

inline ScoredSentence decide_scored(ScoredSentence scored, double challenge_threshold,
                                    double direction_threshold) {
  scored.decision = decide(scored, challenge_threshold, direction_threshold);
  return scored;
}

// ---------------------------------------------------------------------------
// Slice agreement

struct AgreementHistogram {
  // Index 0: all four slices agree, 1: three of four, 2: 2-2 tie.
  std::array<std::size_t, 3> challenge{};
  std::array<std::size_t, 3> direction{};
  std::size_t sentences = 0;

  double fraction(const std::array<std::size_t, 3>& h, std::size_t bucket) const {
    return sentences == 0 ? 0.0 : static_cast<double>(h[bucket]) / static_cast<double>(sentences);
  }

  json to_json() const {
    auto label = [&](const std::array<std::size_t, 3>& h) {
      return json{{"agree_4", h[0]}, {"agree_3", h[1]}, {"tie", h[2]},
                  {"agree_4_fraction", fraction(h, 0)}, {"agree_3_fraction", fraction(h, 1)},
                  {"tie_fraction", fraction(h, 2)}};
    };
    return json{{"sentences", sentences}, {"challenge", label(challenge)}, {"direction", label(direction)}};
  }
};

inline AgreementHistogram agreement_stats(const std::vector<SliceLogits>& slices) {
  AgreementHistogram h;
  auto bucket = [](std::size_t positives) -> std::size_t {
    if (positives == 0 || positives == 4) return 0;
    if (positives == 1 || positives == 3) return 1;
    return 2;
  };
  for (const auto& s : slices) {
    std::size_t c = 0, d = 0;
    for (const auto& l : s.slices) {
      c += l.challenge > 0;
      d += l.direction > 0;
    }
    ++h.challenge[bucket(c)];
    ++h.direction[bucket(d)];
    ++h.sentences;
  }
  return h;
}

}  // namespace scichal
