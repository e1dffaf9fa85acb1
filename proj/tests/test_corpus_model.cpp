#include <gtest/gtest.h>

#include <random>

#include "scichal/corpus.hpp"

using namespace scichal;

namespace {

SentenceRecord good_record(std::int64_t pos = 1) {
  SentenceRecord r;
  r.paper_id = "p1";
  r.position = pos;
  r.text = "The mechanism remains unknown.";
  if (pos > 0) r.prev_text = "Earlier sentence.";
  r.next_text = "Later sentence.";
  r.sentence_id = make_sentence_id(r.paper_id, r.position, r.text);
  return r;
}

bool has_violation(const Verdict& v, const std::string& what) {
  return std::find(v.violations.begin(), v.violations.end(), what) != v.violations.end();
}

}  // namespace

TEST(SentenceId, DeterministicAcrossCalls) {
  EXPECT_EQ(make_sentence_id("p1", 3, "text"), make_sentence_id("p1", 3, "text"));
}

TEST(SentenceId, PositionDistinguishes) {
  EXPECT_NE(make_sentence_id("p1", 0, "a"), make_sentence_id("p1", 1, "a"));
}

// Frozen with an external SHA-256 over the bytes "p1\0" "0\0" "abc".
TEST(SentenceId, FrozenDigestOfCanonicalEncoding) {
  const std::string id = make_sentence_id("p1", 0, "abc");
  EXPECT_EQ(id, "e7aa8f7fee6c62900a82510854b46bc1691737c2e519c21846e7e38b67cf1a62");
  EXPECT_EQ(id.size(), 64u);
  EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(make_sentence_id("p1", 1, "abc"), "ec65a46bb62e2df001298f737be11cf06f251d2d057fa93fd79b46992a01cfb1");
}

TEST(SentenceId, Utf8BytesHashedVerbatim) {
  EXPECT_EQ(make_sentence_id("p\xC3\xA9", 12, "caf\xC3\xA9"),
            "1d41d72c8e100ab80bd781616ff4a597c2a5cd6000aa82659057ff16ad0392c1");
}

TEST(SentenceId, FieldBoundariesAreUnambiguous) {
  EXPECT_NE(make_sentence_id("p1", 1, "0abc"), make_sentence_id("p1", 10, "abc"));
  EXPECT_NE(make_sentence_id("p", 11, "x"), make_sentence_id("p1", 1, "x"));
}

TEST(SentenceId, RejectsEmptyPaperAndNegativePosition) {
  try {
    make_sentence_id("", 0, "a");
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
  EXPECT_THROW(make_sentence_id("p", -1, "a"), Error);
}

TEST(ValidateSentenceRecord, AcceptsWellFormed) {
  EXPECT_TRUE(validate_sentence_record(good_record()).ok());
  EXPECT_TRUE(validate_sentence_record(good_record(0)).ok());
}

TEST(ValidateSentenceRecord, EmptyText) {
  auto r = good_record();
  r.text = "  ";
  r.sentence_id = make_sentence_id(r.paper_id, r.position, r.text);
  const auto v = validate_sentence_record(r);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(has_violation(v, "empty text"));
}

TEST(ValidateSentenceRecord, PrevTextAtPositionZero) {
  auto r = good_record(0);
  r.prev_text = "nope";
  EXPECT_TRUE(has_violation(validate_sentence_record(r), "prev_text present at position 0"));
}

TEST(ValidateSentenceRecord, MissingPrevTextInsidePaper) {
  auto r = good_record(2);
  r.prev_text.reset();
  EXPECT_TRUE(has_violation(validate_sentence_record(r), "prev_text absent at position > 0"));
}

TEST(ValidateSentenceRecord, ListsEveryViolation) {
  SentenceRecord r;
  r.position = 0;
  r.prev_text = "x";
  const auto v = validate_sentence_record(r);
  EXPECT_TRUE(has_violation(v, "empty paper_id"));
  EXPECT_TRUE(has_violation(v, "empty text"));
  EXPECT_TRUE(has_violation(v, "prev_text present at position 0"));
  EXPECT_TRUE(has_violation(v, "empty sentence_id"));
  EXPECT_EQ(v.violations.size(), 4u);
}

TEST(ValidateSentenceRecord, StaleIdentifier) {
  auto r = good_record();
  r.text += " edited";
  EXPECT_TRUE(has_violation(validate_sentence_record(r), "sentence_id does not match content"));
}

TEST(IsoDate, Forms) {
  EXPECT_TRUE(is_iso_date("2020"));
  EXPECT_TRUE(is_iso_date("2020-03"));
  EXPECT_TRUE(is_iso_date("2020-03-31"));
  EXPECT_FALSE(is_iso_date("2020-13-01"));
  EXPECT_FALSE(is_iso_date("03/31/2020"));
}

TEST(PaperRecordJson, RejectsMissingSentencesAndBadDate) {
  EXPECT_THROW(paper_from_json(json{{"paper_id", "p"}}), Error);
  EXPECT_THROW(paper_from_json(json{{"paper_id", "p"}, {"date", "yesterday"}, {"sentences", json::array()}}), Error);
  EXPECT_THROW(paper_from_json(json{{"paper_id", ""}, {"sentences", json::array()}}), Error);
}

TEST(LabelPairJson, ProbabilityRange) {
  EXPECT_THROW(label_pair_from_json(json{{"challenge", true}, {"direction", false}, {"challenge_prob", 1.5}}), Error);
  const auto l = label_pair_from_json(json{{"challenge", true}, {"direction", false}, {"direction_prob", 0.25}});
  EXPECT_FALSE(l.challenge_prob);
  EXPECT_DOUBLE_EQ(*l.direction_prob, 0.25);
}

TEST(SliceLogitsJson, LoaderRejectsIncompleteRecords) {
  const json ok = json::parse(R"({"sentence_id":"s","l1":[1,2],"l2":[3,4],"l3":[5,6],"l4":[7,8]})");
  const auto s = slice_logits_from_json(ok);
  EXPECT_EQ(s.slices[2], (LogitPair{5, 6}));

  json missing = ok;
  missing.erase("l4");
  EXPECT_THROW(slice_logits_from_json(missing), Error);
  json arity = ok;
  arity["l2"] = json::array({1.0});
  EXPECT_THROW(slice_logits_from_json(arity), Error);
  json text = ok;
  text["l1"] = json::array({"1", 2});
  EXPECT_THROW(slice_logits_from_json(text), Error);
  // Non-finite values cannot be written as JSON numbers; the decoder also
  // guards against them when the record arrives through another parser.
  json inf = ok;
  inf["l3"] = json::array({std::numeric_limits<double>::infinity(), 0.0});
  EXPECT_THROW(slice_logits_from_json(inf), Error);
}

TEST(SliceLogitsJson, LoaderReportsLineNumbers) {
  std::istringstream in(
      "{\"sentence_id\":\"a\",\"l1\":[0,0],\"l2\":[0,0],\"l3\":[0,0],\"l4\":[0,0]}\n"
      "{\"sentence_id\":\"b\",\"l1\":[0,0],\"l2\":[0,0],\"l3\":[0,0]}\n");
  try {
    jsonl::read_all<SliceLogits>(in, slice_logits_from_json);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_EQ(e.line(), 2u);
  }
}

// Property: encode(decode(encode(x))) is byte-identical for random records.
TEST(RoundTrip, RandomRecordsAreByteStable) {
  std::mt19937_64 rng(7);
  auto word = [&] {
    static const char* kWords[] = {"alpha", "b\xC3\xA9ta", "\"quoted\"", "tab\there", "line\nbreak", "x"};
    return std::string(kWords[rng() % 6]);
  };
  for (int i = 0; i < 200; ++i) {
    PaperRecord p;
    p.paper_id = "p" + std::to_string(i);
    p.title = word();
    if (rng() % 2) p.date = "2021-0" + std::to_string(1 + rng() % 9);
    if (rng() % 2) p.url = "https://example.org/" + word();
    if (rng() % 2) p.journal = word();
    for (int k = 0, n = static_cast<int>(rng() % 5); k < n; ++k) p.sentences.push_back(word() + " " + word());
    const std::string once = to_json(p).dump();
    const PaperRecord back = paper_from_json(json::parse(once));
    EXPECT_EQ(back, p);
    EXPECT_EQ(to_json(back).dump(), once);

    SentenceRecord s;
    s.paper_id = p.paper_id;
    s.position = static_cast<std::int64_t>(rng() % 50);
    s.text = word();
    if (s.position > 0) s.prev_text = word();
    if (rng() % 2) s.next_text = word();
    s.sentence_id = make_sentence_id(s.paper_id, s.position, s.text);
    const std::string enc = to_json(s).dump();
    EXPECT_EQ(to_json(sentence_from_json(json::parse(enc))).dump(), enc);

    LabelPair l{rng() % 2 == 0, rng() % 2 == 0, std::nullopt, std::nullopt};
    if (rng() % 2) l.challenge_prob = std::ldexp(static_cast<double>(rng() % 1000), -10);
    EXPECT_EQ(label_pair_from_json(to_json(l)), l);

    SliceLogits sl;
    sl.sentence_id = s.sentence_id;
    for (auto& lp : sl.slices) lp = {static_cast<double>(rng() % 2001) / 100.0 - 10.0, std::ldexp(1.0, -static_cast<int>(rng() % 30))};
    const std::string senc = to_json(sl).dump();
    EXPECT_EQ(slice_logits_from_json(json::parse(senc)), sl);
    EXPECT_EQ(to_json(slice_logits_from_json(json::parse(senc))).dump(), senc);
  }
}
