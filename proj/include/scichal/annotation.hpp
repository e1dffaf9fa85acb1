#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scichal/corpus.hpp"
#include "scichal/lexicon.hpp"
#include "scichal/rng.hpp"

namespace scichal {

// ---------------------------------------------------------------------------
// Candidate sampling

struct SampleResult {
  std::vector<std::string> sentence_ids;  // keyword draws first, then the rest
  std::size_t keyword_count = 0;
  std::size_t nonkeyword_count = 0;
  std::vector<std::string> warnings;
};

inline std::size_t keyword_quota(std::size_t n_total, double nonkeyword_fraction) {
  // ceil(n * (1 - f)) with a guard so 0.7 * 10 does not round up to 8.
  const double want = static_cast<double>(n_total) * (1.0 - nonkeyword_fraction);
  return static_cast<std::size_t>(std::ceil(want - 1e-9));
}

// Keyword-matching sentences are upsampled: ceil(n_total * (1 - f)) are drawn
// uniformly from sentences with at least one lexicon hit, the remainder from
// sentences with none. Short pools yield a partial sample and a warning.
inline SampleResult sample_candidates(const std::vector<SentenceRecord>& sentences,
                                      const KeywordLexicon& lex, std::size_t n_total,
                                      double nonkeyword_fraction, std::uint64_t seed) {
  if (!(nonkeyword_fraction >= 0.0 && nonkeyword_fraction <= 1.0)) {
    fail(ErrorCode::kValidation, "nonkeyword_fraction must be in [0,1]");
  }
  lex.validate();
  std::vector<std::size_t> keyword_pool, other_pool;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto hits = lexicon_match(sentences[i], lex);
    (hits.challenge.empty() && hits.direction.empty() ? other_pool : keyword_pool).push_back(i);
  }

  SampleResult result;
  const std::size_t want_kw = std::min(keyword_quota(n_total, nonkeyword_fraction), n_total);
  const std::size_t want_other = n_total - want_kw;
  if (n_total > sentences.size()) {
    result.warnings.push_back("requested " + std::to_string(n_total) + " but only " +
                              std::to_string(sentences.size()) + " sentences available");
  }
  if (want_kw > keyword_pool.size()) {
    result.warnings.push_back("keyword pool has " + std::to_string(keyword_pool.size()) +
                              " sentences, wanted " + std::to_string(want_kw));
  }
  if (want_other > other_pool.size()) {
    result.warnings.push_back("non-keyword pool has " + std::to_string(other_pool.size()) +
                              " sentences, wanted " + std::to_string(want_other));
  }

  SeededRng rng(seed);
  auto draw = [&](const std::vector<std::size_t>& pool, std::size_t k) {
    std::vector<std::size_t> picked;
    for (std::size_t j : rng.choose(pool.size(), k)) picked.push_back(pool[j]);
    std::sort(picked.begin(), picked.end());
    for (std::size_t i : picked) result.sentence_ids.push_back(sentences[i].sentence_id);
    return picked.size();
  };
  result.keyword_count = draw(keyword_pool, want_kw);
  result.nonkeyword_count = draw(other_pool, want_other);
  return result;
}

// ---------------------------------------------------------------------------
// Label aggregation and agreement

struct AnnotationSet {
  std::string sentence_id;
  std::map<std::string, LabelPair> by_annotator;

  bool operator==(const AnnotationSet&) const = default;
};

inline AnnotationSet annotation_set_from_json(const json& j) {
  AnnotationSet a;
  a.sentence_id = field::string(j, "sentence_id");
  const json& anns = field::required(j, "annotations");
  if (!anns.is_object() || anns.empty()) {
    fail(ErrorCode::kSchema, "annotations must be a nonempty object keyed by annotator id");
  }
  for (const auto& [annotator, labels] : anns.items()) {
    a.by_annotator[annotator] = label_pair_from_json(labels);
  }
  return a;
}

inline json to_json(const AnnotationSet& a) {
  json anns = json::object();
  for (const auto& [annotator, labels] : a.by_annotator) {
    anns[annotator] = json{{"challenge", labels.challenge}, {"direction", labels.direction}};
  }
  return json{{"sentence_id", a.sentence_id}, {"annotations", anns}};
}

struct AggregatedLabels {
  LabelPair gold;
  bool challenge_tie = false;
  bool direction_tie = false;
};

// Strict per-label majority. An even split sets the tie flag and leaves the
// gold value false until adjudicated.
inline AggregatedLabels aggregate_labels(const AnnotationSet& ann) {
  if (ann.by_annotator.empty()) fail(ErrorCode::kValidation, "annotation set has no annotators");
  std::size_t c = 0, d = 0;
  for (const auto& [_, l] : ann.by_annotator) {
    c += l.challenge;
    d += l.direction;
  }
  const std::size_t n = ann.by_annotator.size();
  AggregatedLabels out;
  out.gold.challenge = 2 * c > n;
  out.gold.direction = 2 * d > n;
  out.challenge_tie = 2 * c == n;
  out.direction_tie = 2 * d == n;
  return out;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }

  void add(bool gold, bool pred) {
    if (gold && pred) ++tp;
    else if (!gold && pred) ++fp;
    else if (gold && !pred) ++fn;
    else ++tn;
  }
};

// Agreement F1: a label with no positives on either side scores 1.0.
inline double agreement_f1(const Confusion& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

struct AgreementScores {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double challenge_f1 = 0.0;
  double direction_f1 = 0.0;
  std::size_t sentences = 0;
};

// `a` is treated as ground truth and `b` as predictions. Both maps must
// cover exactly the same sentence ids.
inline AgreementScores pairwise_agreement(const std::map<std::string, LabelPair>& a,
                                          const std::map<std::string, LabelPair>& b) {
  if (a.size() != b.size()) fail(ErrorCode::kAlignment, "annotators cover different sentence sets");
  Confusion c, d;
  for (const auto& [id, gold] : a) {
    auto it = b.find(id);
    if (it == b.end()) fail(ErrorCode::kAlignment, "sentence " + id + " missing from second labeling");
    c.add(gold.challenge, it->second.challenge);
    d.add(gold.direction, it->second.direction);
  }
  AgreementScores s;
  s.sentences = a.size();
  s.challenge_f1 = agreement_f1(c);
  s.direction_f1 = agreement_f1(d);
  Confusion pooled = c;
  pooled += d;
  s.micro_f1 = agreement_f1(pooled);
  s.macro_f1 = (s.challenge_f1 + s.direction_f1) / 2.0;
  return s;
}

struct AnnotatorPairAgreement {
  std::string gold_annotator;
  std::string other_annotator;
  AgreementScores scores;
};

// Agreement for every annotator pair over the sentences both labeled; the
// lexicographically smaller id is taken as ground truth.
inline std::vector<AnnotatorPairAgreement> all_pairs_agreement(const std::vector<AnnotationSet>& sets) {
  std::set<std::string> annotators;
  for (const auto& s : sets) {
    for (const auto& [a, _] : s.by_annotator) annotators.insert(a);
  }
  std::vector<AnnotatorPairAgreement> out;
  for (auto i = annotators.begin(); i != annotators.end(); ++i) {
    for (auto j = std::next(i); j != annotators.end(); ++j) {
      std::map<std::string, LabelPair> a, b;
      for (const auto& s : sets) {
        auto ia = s.by_annotator.find(*i);
        auto ib = s.by_annotator.find(*j);
        if (ia != s.by_annotator.end() && ib != s.by_annotator.end()) {
          a[s.sentence_id] = ia->second;
          b[s.sentence_id] = ib->second;
        }
      }
      if (a.empty()) continue;
      out.push_back({*i, *j, pairwise_agreement(a, b)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified paper-disjoint splits

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

inline Split split_from_name(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "test") return Split::kTest;
  fail(ErrorCode::kSchema, "unknown split '" + std::string(s) + "'");
}

struct SplitExample {
  std::string sentence_id;
  std::string paper_id;
  LabelPair gold;
};

using SplitAssignment = std::map<std::string, Split>;

// Joint class index in table order: (-c,-d), (-c,+d), (+c,-d), (+c,+d).
inline std::size_t joint_class(const LabelPair& l) {
  return (l.challenge ? 2u : 0u) + (l.direction ? 1u : 0u);
}

using ClassCounts = std::array<std::size_t, 4>;

namespace detail {

struct PaperGroup {
  std::string paper_id;
  std::vector<std::string> sentence_ids;
  std::array<double, 4> counts{};
  double size = 0;
};

struct SplitState {
  std::array<std::array<double, 4>, 3> assigned{};
  std::array<double, 3> totals{};
  std::array<std::array<double, 4>, 3> target{};
  std::array<double, 3> target_totals{};

  // Change in squared deviation when adding (sign=+1) or removing (-1) a
  // paper from split s.
  double delta(const PaperGroup& g, std::size_t s, double sign) const {
    double d = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      const double dev = assigned[s][c] - target[s][c];
      const double p = sign * g.counts[c];
      d += p * (2 * dev + p);
    }
    const double dev = totals[s] - target_totals[s];
    const double n = sign * g.size;
    d += n * (2 * dev + n);
    return d;
  }

  void apply(const PaperGroup& g, std::size_t s, double sign) {
    for (std::size_t c = 0; c < 4; ++c) assigned[s][c] += sign * g.counts[c];
    totals[s] += sign * g.size;
  }
};

}  // namespace detail

// Assigns whole papers to train/dev/test. Papers are shuffled with the seed,
// ordered largest first, and greedily placed where they least increase the
// squared deviation from the per-split targets (each split's ratio times the
// global 4-class joint counts, plus its sentence total). A local search then
// moves single papers while that lowers the deviation.
inline SplitAssignment stratified_split(const std::vector<SplitExample>& examples,
                                        std::array<double, 3> ratios, std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    fail(ErrorCode::kValidation, "split ratios must be non-negative and sum to 1");
  }
  std::map<std::string, detail::PaperGroup> by_paper;
  std::set<std::string> seen_ids;
  std::array<double, 4> global{};
  for (const auto& ex : examples) {
    if (!seen_ids.insert(ex.sentence_id).second) {
      fail(ErrorCode::kValidation, "duplicate sentence_id " + ex.sentence_id);
    }
    auto& g = by_paper[ex.paper_id];
    g.paper_id = ex.paper_id;
    g.sentence_ids.push_back(ex.sentence_id);
    g.counts[joint_class(ex.gold)] += 1;
    g.size += 1;
    global[joint_class(ex.gold)] += 1;
  }
  const std::size_t active_splits =
      static_cast<std::size_t>(std::count_if(ratios.begin(), ratios.end(), [](double r) { return r > 0; }));
  if (by_paper.size() < active_splits) {
    fail(ErrorCode::kValidation, "fewer papers (" + std::to_string(by_paper.size()) +
                                     ") than splits (" + std::to_string(active_splits) + ")");
  }

  std::vector<detail::PaperGroup> papers;
  for (auto& [_, g] : by_paper) papers.push_back(std::move(g));
  SeededRng rng(seed);
  rng.shuffle(papers);
  std::stable_sort(papers.begin(), papers.end(),
                   [](const auto& a, const auto& b) { return a.size > b.size; });

  detail::SplitState state;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < 4; ++c) state.target[s][c] = ratios[s] * global[c];
    state.target_totals[s] = ratios[s] * static_cast<double>(examples.size());
  }

  std::vector<std::size_t> where(papers.size());
  std::array<std::size_t, 3> paper_counts{};
  for (std::size_t i = 0; i < papers.size(); ++i) {
    std::size_t best = 3;
    double best_delta = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      if (ratios[s] <= 0) continue;
      const double d = state.delta(papers[i], s, +1);
      if (best == 3 || d < best_delta) {
        best = s;
        best_delta = d;
      }
    }
    where[i] = best;
    state.apply(papers[i], best, +1);
    ++paper_counts[best];
  }

  for (int pass = 0; pass < 100; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < papers.size(); ++i) {
      const std::size_t from = where[i];
      if (paper_counts[from] <= 1) continue;
      const double removal = state.delta(papers[i], from, -1);
      std::size_t best = from;
      double best_gain = -1e-9;
      state.apply(papers[i], from, -1);
      for (std::size_t s = 0; s < 3; ++s) {
        if (s == from || ratios[s] <= 0) continue;
        const double change = removal + state.delta(papers[i], s, +1);
        if (change < best_gain) {
          best = s;
          best_gain = change;
        }
      }
      state.apply(papers[i], best, +1);
      if (best != from) {
        where[i] = best;
        --paper_counts[from];
        ++paper_counts[best];
        moved = true;
      }
    }
    if (!moved) break;
  }

  // Every active split gets at least one paper.
  for (std::size_t s = 0; s < 3; ++s) {
    if (ratios[s] <= 0 || paper_counts[s] > 0) continue;
    std::size_t donor = papers.size();
    for (std::size_t i = papers.size(); i-- > 0;) {
      if (paper_counts[where[i]] > 1) {
        donor = i;
        break;
      }
    }
    --paper_counts[where[donor]];
    where[donor] = s;
    ++paper_counts[s];
  }

  SplitAssignment out;
  for (std::size_t i = 0; i < papers.size(); ++i) {
    for (const auto& id : papers[i].sentence_ids) out[id] = static_cast<Split>(where[i]);
  }
  return out;
}

struct LabelDistribution {
  std::array<ClassCounts, 3> per_split{};
  ClassCounts total{};

  bool operator==(const LabelDistribution&) const = default;

  json to_json() const {
    static constexpr const char* kClasses[] = {"not_challenge_not_direction", "not_challenge_direction",
                                               "challenge_not_direction", "challenge_direction"};
    json j = json::object();
    auto counts = [&](const ClassCounts& c) {
      json o = json::object();
      for (std::size_t k = 0; k < 4; ++k) o[kClasses[k]] = c[k];
      return o;
    };
    for (std::size_t s = 0; s < 3; ++s) j[std::string(split_name(static_cast<Split>(s)))] = counts(per_split[s]);
    j["all"] = counts(total);
    return j;
  }
};

// Joint-class counts, per split when an assignment is given. Examples
// missing from the assignment only count toward the total.
inline LabelDistribution label_distribution(const std::vector<SplitExample>& examples,
                                            const SplitAssignment* assignment = nullptr) {
  LabelDistribution d;
  for (const auto& ex : examples) {
    const std::size_t k = joint_class(ex.gold);
    ++d.total[k];
    if (assignment) {
      if (auto it = assignment->find(ex.sentence_id); it != assignment->end()) {
        ++d.per_split[static_cast<std::size_t>(it->second)][k];
      }
    }
  }
  return d;
}

}  // namespace scichal
