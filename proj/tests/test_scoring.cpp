#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "scichal/scoring.hpp"

using namespace scichal;

namespace {

SliceLogits slices(std::array<double, 4> c, std::array<double, 4> d = {0, 0, 0, 0}) {
  SliceLogits s;
  s.sentence_id = "s";
  for (std::size_t i = 0; i < 4; ++i) s.slices[i] = {c[i], d[i]};
  return s;
}

ScoredSentence with_probs(double pc, double pd) {
  return ScoredSentence{"s", std::nullopt, LabelPair{false, false, pc, pd}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Baselines

TEST(KeywordScore, UnknownIsChallenge) {
  const auto l = keyword_score(std::string_view("Results remain unknown."), seed_lexicon());
  EXPECT_TRUE(l.challenge);
  EXPECT_FALSE(l.direction);
  EXPECT_FALSE(l.challenge_prob);
}

TEST(KeywordScore, SuggestFutureWorkIsDirection) {
  const auto lex = KeywordLexicon::from_terms({}, {"suggest", "future work"});
  EXPECT_TRUE(keyword_score(std::string_view("We suggest future work on X."), lex).direction);
}

TEST(KeywordScore, NoHits) {
  EXPECT_EQ(keyword_score(std::string_view("Cells were counted."), seed_lexicon()), LabelPair{});
}

TEST(Polarity, NegativeTokensAreChallenge) {
  const PolarityLexicon lex{{"dire", -0.8}, {"grim", -0.8}};
  const auto l = polarity_score(std::string_view("dire and grim"), lex, -0.1, 0.1);
  EXPECT_TRUE(l.challenge);
  EXPECT_FALSE(l.direction);
}

TEST(Polarity, NeutralSentence) {
  EXPECT_EQ(polarity_score(std::string_view("the cells were counted"), default_polarity_lexicon(), -0.1, 0.1), LabelPair{});
}

// Mean of {+0.6, +0.2} = 0.4 >= 0.3.
TEST(Polarity, MeanOfValences) {
  const PolarityLexicon lex{{"bright", 0.6}, {"fine", 0.2}};
  EXPECT_DOUBLE_EQ(polarity("a bright and fine result", lex), 0.4);
  EXPECT_TRUE(polarity_score(std::string_view("a bright and fine result"), lex, -0.1, 0.3).direction);
  EXPECT_FALSE(polarity_score(std::string_view("a bright and fine result"), lex, -0.1, 0.45).direction);
}

TEST(Polarity, ThresholdsValidated) {
  EXPECT_THROW(polarity_score(std::string_view("x"), default_polarity_lexicon(), 0.1, 0.2), Error);
  EXPECT_THROW(polarity_score(std::string_view("x"), default_polarity_lexicon(), -0.1, -0.05), Error);
}

TEST(Polarity, ParseLexiconFile) {
  std::istringstream in("# word valence\nGood\t0.5\nbad\t-0.5\n");
  const auto lex = parse_polarity_lexicon(in);
  EXPECT_DOUBLE_EQ(lex.at("good"), 0.5);
  std::istringstream bad("word 0.5\n");
  EXPECT_THROW(parse_polarity_lexicon(bad), Error);
  std::istringstream range("word\t2\n");
  EXPECT_THROW(parse_polarity_lexicon(range), Error);
}

// ---------------------------------------------------------------------------
// Zero-shot

namespace {

ZeroShotScores zs(double problem, double other, double direction_max) {
  ZeroShotScores z{"s", {}, {}};
  for (const auto& l : default_challenge_sublabels()) z.challenge_sublabel_probs[l] = other;
  z.challenge_sublabel_probs["problem"] = problem;
  for (const auto& l : default_direction_sublabels()) z.direction_sublabel_probs[l] = 0.1;
  z.direction_sublabel_probs["future work"] = direction_max;
  return z;
}

}  // namespace

TEST(ZeroShot, SubLabelListsHaveEightAndSix) {
  EXPECT_EQ(default_challenge_sublabels().size(), 8u);
  EXPECT_EQ(default_direction_sublabels().size(), 6u);
}

TEST(ZeroShot, ProblemAtNinetyFive) {
  const auto l = zeroshot_decide(zs(0.95, 0.3, 0.2));
  EXPECT_TRUE(l.challenge);
  EXPECT_FALSE(l.direction);
  EXPECT_DOUBLE_EQ(*l.challenge_prob, 0.95);
  EXPECT_DOUBLE_EQ(*l.direction_prob, 0.2);
}

TEST(ZeroShot, AllBelowThreshold) {
  const auto l = zeroshot_decide(zs(0.89, 0.5, 0.8999));
  EXPECT_FALSE(l.challenge);
  EXPECT_FALSE(l.direction);
}

TEST(ZeroShot, BoundaryIsInclusive) {
  const auto l = zeroshot_decide(zs(0.9, 0.1, 0.9));
  EXPECT_TRUE(l.challenge);
  EXPECT_TRUE(l.direction);
}

TEST(ZeroShot, ConcatenatedSingleLabel) {
  const ZeroShotScores z{"s", {{"challenge, problem, difficulty", 0.91}}, {{"direction, suggestion", 0.4}}};
  EXPECT_TRUE(zeroshot_decide(z).challenge);
}

TEST(ZeroShot, EmptyMapIsValidationError) {
  const ZeroShotScores z{"s", {}, {{"direction", 0.4}}};
  try {
    zeroshot_decide(z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(ZeroShot, LoaderContract) {
  const json ok = json::parse(R"({"sentence_id":"s","challenge_sublabel_probs":{"problem":0.9},"direction_sublabel_probs":{"direction":0.1}})");
  EXPECT_EQ(to_json(zeroshot_from_json(ok)), ok);
  json empty = ok;
  empty["direction_sublabel_probs"] = json::object();
  EXPECT_THROW(zeroshot_from_json(empty), Error);
  json range = ok;
  range["challenge_sublabel_probs"]["problem"] = 1.2;
  EXPECT_THROW(zeroshot_from_json(range), Error);
  json missing = ok;
  missing.erase("challenge_sublabel_probs");
  EXPECT_THROW(zeroshot_from_json(missing), Error);
}

TEST(ZeroShot, RestrictSublabels) {
  const auto z = zs(0.95, 0.3, 0.2);
  const auto r = restrict_sublabels(z, {"flaw"}, {"direction"});
  EXPECT_FALSE(zeroshot_decide(r).challenge);
  EXPECT_THROW(restrict_sublabels(z, {"nonexistent"}, {"direction"}), Error);
}

// ---------------------------------------------------------------------------
// Slice-Combine

TEST(SliceCombine, MeanOfWorkedLogits) {
  const auto s = slice_combine(slices({2.0, 1.0, 0.0, 1.0}), CombineStrategy::mean());
  EXPECT_EQ(s.combined_logits->challenge, 1.0);
  EXPECT_DOUBLE_EQ(*s.decision.challenge_prob, 1.0 / (1.0 + std::exp(-1.0)));
  EXPECT_TRUE(s.decision.challenge);
}

TEST(SliceCombine, MedianOfWorkedLogits) {
  EXPECT_EQ(slice_combine(slices({2.0, 1.0, 0.0, 1.0}), CombineStrategy::median()).combined_logits->challenge, 1.0);
  EXPECT_EQ(slice_combine(slices({4.0, -1.0, 0.5, 3.0}), CombineStrategy::median()).combined_logits->challenge, 1.75);
}

// Votes (1,1,0,1): a logit of exactly 0 votes negative.
TEST(SliceCombine, MajorityVoteStrictPositiveRule) {
  const auto s = slice_combine(slices({2.0, 1.0, 0.0, 1.0}), CombineStrategy::majority_vote());
  EXPECT_TRUE(s.decision.challenge);
  EXPECT_GT(s.combined_logits->challenge, 0.0);
  const auto neg = slice_combine(slices({0.0, -2.0, 0.0, 1.0}), CombineStrategy::majority_vote());
  EXPECT_FALSE(neg.decision.challenge);
  EXPECT_DOUBLE_EQ(neg.combined_logits->challenge, -2.0 / 3.0);
}

TEST(SliceCombine, MajorityVoteTieFallsBackToMeanSign) {
  const auto pos = slice_combine(slices({3.0, 1.0, -1.0, -1.0}), CombineStrategy::majority_vote());
  EXPECT_EQ(pos.combined_logits->challenge, 0.5);
  EXPECT_TRUE(pos.decision.challenge);
  const auto neg = slice_combine(slices({1.0, 1.0, -1.0, -3.0}), CombineStrategy::majority_vote());
  EXPECT_FALSE(neg.decision.challenge);
}

TEST(SliceCombine, ExtremizeScalesMean) {
  const auto s = slice_combine(slices({2.0, 1.0, 0.0, 1.0}), CombineStrategy::logodds_extremize(3.0));
  EXPECT_EQ(s.combined_logits->challenge, 3.0);
  EXPECT_THROW(slice_combine(slices({1, 1, 1, 1}), CombineStrategy::logodds_extremize(1.0)), Error);
  EXPECT_EQ(CombineStrategy::parse("logodds_extremize").alpha, 2.0);
  EXPECT_THROW(CombineStrategy::parse("router"), Error);
}

TEST(SliceCombine, NonFiniteLogitRejected) {
  EXPECT_THROW(slice_combine(slices({1, std::nan(""), 1, 1}), CombineStrategy::mean()), Error);
  EXPECT_THROW(slice_combine(slices({1, 1, 1, 1}, {0, 0, INFINITY, 0}), CombineStrategy::median()), Error);
}

TEST(SliceCombine, SliceMasks) {
  const auto s = slices({1.0, 3.0, -5.0, -7.0});
  EXPECT_EQ(slice_combine(s, CombineStrategy::mean(), kDirectSlices).combined_logits->challenge, 2.0);
  EXPECT_EQ(slice_combine(s, CombineStrategy::mean(), kCrossedSlices).combined_logits->challenge, -6.0);
  EXPECT_EQ(parse_slice_mask("12"), kDirectSlices);
  EXPECT_EQ(parse_slice_mask("34"), kCrossedSlices);
  EXPECT_EQ(parse_slice_mask("all"), kAllSlices);
  EXPECT_THROW(parse_slice_mask("5"), Error);
  EXPECT_THROW(parse_slice_mask(""), Error);
}

namespace {

double rand_logit(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(-20.0, 20.0)(rng);
}

}  // namespace

TEST(SliceCombineProperties, AllEqualSlicesIdentity) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 2000; ++t) {
    const double c = rand_logit(rng), d = rand_logit(rng);
    const auto s = slices({c, c, c, c}, {d, d, d, d});
    for (auto strat : {CombineStrategy::mean(), CombineStrategy::median(), CombineStrategy::majority_vote()}) {
      const auto out = slice_combine(s, strat);
      EXPECT_EQ(out.combined_logits->challenge, c);
      EXPECT_EQ(out.combined_logits->direction, d);
    }
  }
}

TEST(SliceCombineProperties, MeanEqualsMedianWhenSymmetric) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double m = std::round(rand_logit(rng) * 8) / 8, a = std::round(std::abs(rand_logit(rng)) * 8) / 8,
                 b = std::round(std::abs(rand_logit(rng)) * 8) / 8;
    std::array<double, 4> v{m - a, m + b, m + a, m - b};
    std::shuffle(v.begin(), v.end(), rng);
    const auto s = slices(v);
    EXPECT_NEAR(slice_combine(s, CombineStrategy::mean()).combined_logits->challenge,
                slice_combine(s, CombineStrategy::median()).combined_logits->challenge, 1e-12);
  }
}

TEST(SliceCombineProperties, ExtremizePreservesDecision) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 1000; ++t) {
    const auto s = slices({rand_logit(rng), rand_logit(rng), rand_logit(rng), rand_logit(rng)},
                          {rand_logit(rng), rand_logit(rng), rand_logit(rng), rand_logit(rng)});
    const double alpha = 1.0 + std::uniform_real_distribution<double>(0.01, 5.0)(rng);
    const auto m = slice_combine(s, CombineStrategy::mean());
    const auto x = slice_combine(s, CombineStrategy::logodds_extremize(alpha));
    EXPECT_EQ(m.decision.challenge, x.decision.challenge);
    EXPECT_EQ(m.decision.direction, x.decision.direction);
  }
}

TEST(SliceCombineProperties, LabelsAreIndependent) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::array<double, 4> d{rand_logit(rng), rand_logit(rng), rand_logit(rng), rand_logit(rng)};
    const auto a = slices({rand_logit(rng), rand_logit(rng), rand_logit(rng), rand_logit(rng)}, d);
    const auto b = slices({rand_logit(rng), rand_logit(rng), rand_logit(rng), rand_logit(rng)}, d);
    for (auto strat : {CombineStrategy::mean(), CombineStrategy::median(), CombineStrategy::majority_vote(),
                       CombineStrategy::logodds_extremize()}) {
      EXPECT_EQ(slice_combine(a, strat).combined_logits->direction, slice_combine(b, strat).combined_logits->direction);
      EXPECT_EQ(slice_combine(a, strat).decision.direction, slice_combine(b, strat).decision.direction);
    }
  }
}

TEST(Logistic, StableAtExtremes) {
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_EQ(logistic(-1000.0), 0.0);
  EXPECT_EQ(logistic(1000.0), 1.0);
  EXPECT_NEAR(logistic(-30.0), 9.357622968840175e-14, 1e-20);
}

// ---------------------------------------------------------------------------
// Decisions

TEST(Decide, SearchThreshold) {
  const auto l = decide(with_probs(0.995, 0.30), 0.99, 0.99);
  EXPECT_TRUE(l.challenge);
  EXPECT_FALSE(l.direction);
}

TEST(Decide, BoundaryInclusive) {
  const auto l = decide(with_probs(0.5, 0.5), 0.5, 0.5);
  EXPECT_TRUE(l.challenge);
  EXPECT_TRUE(l.direction);
}

TEST(Decide, BothBelow) {
  EXPECT_EQ(decide(with_probs(0.2, 0.95), 0.99, 0.99).challenge, false);
  EXPECT_EQ(decide(with_probs(0.2, 0.95), 0.99, 0.99).direction, false);
}

TEST(Decide, ThresholdsMustBeOpenUnitInterval) {
  EXPECT_THROW(decide(with_probs(0.5, 0.5), 0.0, 0.5), Error);
  EXPECT_THROW(decide(with_probs(0.5, 0.5), 0.5, 1.0), Error);
}

TEST(Decide, MissingProbabilityKeepsBoolean) {
  const ScoredSentence s{"s", std::nullopt, LabelPair{true, false, std::nullopt, std::nullopt}};
  EXPECT_TRUE(decide(s, 0.99, 0.99).challenge);
}

TEST(Decide, Monotone) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int t = 0; t < 2000; ++t) {
    const auto s = with_probs(u(rng), u(rng));
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    const auto a = decide(s, lo, lo), b = decide(s, hi, hi);
    EXPECT_TRUE(!b.challenge || a.challenge);
    EXPECT_TRUE(!b.direction || a.direction);
  }
}

TEST(ScoredJson, RoundTrip) {
  const auto s = slice_combine(slices({0.5, 1.5, -2.0, 3.0}, {1, 2, 3, 4}), CombineStrategy::mean());
  EXPECT_EQ(scored_from_json(to_json(s)), s);
  const ScoredSentence baseline{"b", std::nullopt, LabelPair{true, false, std::nullopt, std::nullopt}};
  const json j = to_json(baseline);
  EXPECT_TRUE(j["challenge_logit"].is_null());
  EXPECT_EQ(scored_from_json(j), baseline);
}

// ---------------------------------------------------------------------------
// Slice agreement

TEST(AgreementStats, AllPositive) {
  std::vector<SliceLogits> v(5, slices({1, 2, 3, 4}, {1, 1, 1, 1}));
  const auto h = agreement_stats(v);
  EXPECT_EQ(h.fraction(h.challenge, 0), 1.0);
  EXPECT_EQ(h.fraction(h.direction, 0), 1.0);
}

TEST(AgreementStats, TwoTwoIsTie) {
  const auto h = agreement_stats({slices({1, 1, -1, -1})});
  EXPECT_EQ(h.challenge[2], 1u);
  EXPECT_EQ(h.direction[0], 1u);
}

TEST(AgreementStats, SevenOfTenFourAgree) {
  std::vector<SliceLogits> v;
  for (int i = 0; i < 7; ++i) v.push_back(slices({-1, -1, -1, -1}));
  for (int i = 0; i < 2; ++i) v.push_back(slices({1, 1, 1, -1}));
  v.push_back(slices({1, -1, 1, -1}));
  const auto h = agreement_stats(v);
  EXPECT_DOUBLE_EQ(h.fraction(h.challenge, 0), 0.7);
  EXPECT_DOUBLE_EQ(h.fraction(h.challenge, 1), 0.2);
  EXPECT_DOUBLE_EQ(h.fraction(h.challenge, 2), 0.1);
  EXPECT_EQ(h.to_json()["challenge"]["agree_4"], 7);
}
