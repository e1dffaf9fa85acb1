#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "scichal/ingestion.hpp"

using namespace scichal;

namespace {

const char* kGood1 = "The role of this protein in the disease remains unknown.";
const char* kGood2 = "We suggest that future work should explore the pathway.";
const char* kGood3 = "These results are limited by the small size of our cohort.";

std::string corpus_line(const std::string& id, const std::vector<std::string>& sentences) {
  return to_json(PaperRecord{id, "Title " + id, "2020-05-01", std::nullopt, "J", sentences}).dump();
}

std::string repeat_words(const std::vector<std::string>& words, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += words[i % words.size()];
  }
  return out;
}

}  // namespace

TEST(CleanFilter, TooShort) {
  const auto v = clean_filter("Results were unclear.", CleaningConfig{});
  EXPECT_EQ(v, (FilterVerdict{false, FilterReason::kTooShort}));
}

TEST(CleanFilter, TooLong) {
  const std::string s = repeat_words({"the", "cells", "were", "counted"}, 129);
  EXPECT_EQ(clean_filter(s, CleaningConfig{}).reason, FilterReason::kTooLong);
  EXPECT_TRUE(clean_filter(repeat_words({"the", "cells", "were", "counted"}, 128), CleaningConfig{}).keep);
}

TEST(CleanFilter, LatexMarker) {
  const auto v = clean_filter("The ratio is given by \\frac{a}{b} in the model above.", CleaningConfig{});
  EXPECT_EQ(v.reason, FilterReason::kLatexOrGarbled);
  EXPECT_FALSE(v.keep);
}

TEST(CleanFilter, GarbledBytes) {
  EXPECT_EQ(clean_filter("The cells were \xFF\xFE counted in the second assay.", CleaningConfig{}).reason,
            FilterReason::kLatexOrGarbled);
  EXPECT_EQ(clean_filter("The cells were \x01 counted in the second assay.", CleaningConfig{}).reason,
            FilterReason::kLatexOrGarbled);
}

TEST(CleanFilter, NumericMathematical) {
  EXPECT_EQ(clean_filter("1.2 3.4 5.6 = 7.8 + 9.0 of 11", CleaningConfig{}).reason,
            FilterReason::kNumericMathematical);
}

// 30 tokens, none in the stopword list: ratio 0/30 < 0.05.
TEST(CleanFilter, NonEnglishThirtyTokens) {
  const std::vector<std::string> words{"Zellen", "wurden", "unter", "Lichtmikroskop", "beobachtet",
                                       "anschliessend", "Proben", "gemessen", "Ergebnisse", "zeigten"};
  const std::string s = repeat_words(words, 30);
  ASSERT_EQ(text::token_count(s), 30u);
  for (const auto& w : words) ASSERT_EQ(english_stopwords().count(text::lower(w)), 0u) << w;
  EXPECT_EQ(clean_filter(s, CleaningConfig{}).reason, FilterReason::kNonEnglish);
}

TEST(CleanFilter, StopwordRatioBoundary) {
  // 1 stopword in 20 tokens is exactly 0.05 and passes the inclusive minimum.
  std::vector<std::string> toks(19, "zellen");
  toks.push_back("the");
  EXPECT_TRUE(clean_filter(repeat_words(toks, 20), CleaningConfig{}).keep);
  std::vector<std::string> fewer(20, "zellen");
  fewer.push_back("the");
  EXPECT_EQ(clean_filter(repeat_words(fewer, 21), CleaningConfig{}).reason, FilterReason::kNonEnglish);
}

TEST(CleanFilter, CheckOrderLengthBeforeLatex) {
  EXPECT_EQ(clean_filter("see \\frac{a}{b}", CleaningConfig{}).reason, FilterReason::kTooShort);
  EXPECT_EQ(clean_filter("\\cite{x} 1 2 3 4 5 6 7", CleaningConfig{}).reason, FilterReason::kLatexOrGarbled);
}

TEST(CleanFilter, KeepsOrdinaryEnglish) {
  for (const char* s : {kGood1, kGood2, kGood3}) EXPECT_TRUE(clean_filter(s, CleaningConfig{}).keep) << s;
}

TEST(CleaningConfig, Validation) {
  CleaningConfig c;
  c.min_tokens = 0;
  EXPECT_THROW(c.validate(), Error);
  c.min_tokens = 10;
  c.max_tokens = 10;
  EXPECT_THROW(c.validate(), Error);
}

TEST(ParseCorpus, TwoValidLines) {
  std::istringstream in(corpus_line("a", {kGood1}) + "\n" + corpus_line("b", {kGood2}) + "\n");
  std::size_t skipped = 99;
  const auto papers = parse_corpus(in, &skipped);
  ASSERT_EQ(papers.size(), 2u);
  EXPECT_EQ(papers[0].paper_id, "a");
  EXPECT_EQ(papers[1].paper_id, "b");
  EXPECT_EQ(skipped, 0u);
}

TEST(ParseCorpus, MalformedLineSkippedAndCounted) {
  std::istringstream in(corpus_line("a", {kGood1}) + "\n{not json\n");
  std::size_t skipped = 0;
  const auto papers = parse_corpus(in, &skipped);
  EXPECT_EQ(papers.size(), 1u);
  EXPECT_EQ(skipped, 1u);
}

TEST(ParseCorpus, EmptyStream) {
  std::istringstream in("");
  EXPECT_TRUE(parse_corpus(in).empty());
}

TEST(ParseCorpus, DuplicatePaperIdIsMalformed) {
  std::istringstream in(corpus_line("a", {kGood1}) + "\n" + corpus_line("a", {kGood2}) + "\n" +
                        corpus_line("b", {kGood3}) + "\n");
  std::size_t skipped = 0;
  EXPECT_EQ(parse_corpus(in, &skipped).size(), 2u);
  EXPECT_EQ(skipped, 1u);
}

TEST(ParseCorpus, MajorityMalformedIsCorpusFormatError) {
  std::istringstream in(corpus_line("a", {kGood1}) + "\nbad\n[1,2]\n");
  try {
    parse_corpus(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorpusFormat);
  }
  std::istringstream half(corpus_line("a", {kGood1}) + "\nbad\n");
  EXPECT_NO_THROW(parse_corpus(half));
}

TEST(ContextWindows, ThreeSentencesAllKept) {
  const PaperRecord p{"p", "t", std::nullopt, std::nullopt, std::nullopt, {kGood1, kGood2, kGood3}};
  const auto recs = build_context_windows(p, CleaningConfig{});
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_FALSE(recs[0].prev_text);
  EXPECT_EQ(*recs[0].next_text, kGood2);
  EXPECT_EQ(*recs[1].prev_text, kGood1);
  EXPECT_EQ(*recs[1].next_text, kGood3);
  EXPECT_EQ(*recs[2].prev_text, kGood2);
  EXPECT_FALSE(recs[2].next_text);
  for (const auto& r : recs) EXPECT_TRUE(validate_sentence_record(r).ok());
}

TEST(ContextWindows, SingleSentence) {
  const PaperRecord p{"p", "t", std::nullopt, std::nullopt, std::nullopt, {kGood1}};
  const auto recs = build_context_windows(p, CleaningConfig{});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].prev_text);
  EXPECT_FALSE(recs[0].next_text);
}

// Sentence 2 is dropped as too short; its neighbours still cite it.
TEST(ContextWindows, FilteredMiddleSentenceStillServesAsContext) {
  const std::string middle = "See Table 2.";
  const PaperRecord p{"p", "t", std::nullopt, std::nullopt, std::nullopt, {kGood1, middle, kGood3}};
  CleaningReport report;
  const auto recs = build_context_windows(p, CleaningConfig{}, &report);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].position, 0);
  EXPECT_EQ(*recs[0].next_text, middle);
  EXPECT_EQ(recs[1].position, 2);
  EXPECT_EQ(*recs[1].prev_text, middle);
  EXPECT_EQ(report.rejected_by_reason.at("too_short"), 1u);
}

namespace {

std::string random_corpus(std::uint64_t seed, std::size_t papers) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> pool{kGood1, kGood2, kGood3, "Short one.", "1 2 3 4 5 6 7 8",
                                      "Use \\begin{equation} x = y \\end{equation} in the text here.",
                                      "Zellen wurden gemessen Proben zeigten Ergebnisse deutlich klar"};
  std::string out;
  for (std::size_t i = 0; i < papers; ++i) {
    std::vector<std::string> s;
    for (std::size_t k = 0, n = rng() % 8; k < n; ++k) s.push_back(pool[rng() % pool.size()]);
    out += corpus_line("paper" + std::to_string(i), s) + "\n";
    if (rng() % 10 == 0) out += "{broken\n";
  }
  return out;
}

std::string dump(const IngestResult& r) {
  std::ostringstream out;
  jsonl::write_all(out, r.sentences, [](const SentenceRecord& s) { return to_json(s); });
  out << r.report.to_json().dump() << '\n';
  return out.str();
}

}  // namespace

TEST(Ingest, CountConservationAndContextCorrectness) {
  const std::string corpus = random_corpus(3, 300);
  std::istringstream in(corpus);
  const IngestResult r = ingest(in, CleaningConfig{});
  EXPECT_EQ(r.report.kept + r.report.rejected, r.report.total);
  std::size_t by_reason = 0;
  for (const auto& [_, n] : r.report.rejected_by_reason) by_reason += n;
  EXPECT_EQ(by_reason, r.report.rejected);
  EXPECT_EQ(r.sentences.size(), r.report.kept);
  EXPECT_GT(r.report.malformed_lines, 0u);

  std::istringstream again(corpus);
  std::map<std::string, PaperRecord> papers;
  for (auto& p : parse_corpus(again)) papers[p.paper_id] = p;
  for (const auto& s : r.sentences) {
    const auto& raw = papers.at(s.paper_id).sentences;
    const auto p = static_cast<std::size_t>(s.position);
    EXPECT_EQ(s.text, raw[p]);
    if (p > 0) EXPECT_EQ(*s.prev_text, raw[p - 1]);
    else EXPECT_FALSE(s.prev_text);
    if (p + 1 < raw.size()) EXPECT_EQ(*s.next_text, raw[p + 1]);
    else EXPECT_FALSE(s.next_text);
    EXPECT_TRUE(validate_sentence_record(s).ok());
  }
}

TEST(Ingest, IdempotentAndIndependentOfWorkerCount) {
  const std::string corpus = random_corpus(11, 400);
  std::istringstream a(corpus), b(corpus), c(corpus);
  const std::string once = dump(ingest(a, CleaningConfig{}, 1));
  EXPECT_EQ(once, dump(ingest(b, CleaningConfig{}, 1)));
  EXPECT_EQ(once, dump(ingest(c, CleaningConfig{}, 4, 7)));
}
