#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "scichal/corpus.hpp"
#include "scichal/parallel.hpp"
#include "scichal/text.hpp"

namespace scichal {

enum class FilterReason {
  kOk,
  kTooShort,
  kTooLong,
  kNonEnglish,
  kNumericMathematical,
  kLatexOrGarbled,
};

inline std::string_view filter_reason_name(FilterReason r) {
  switch (r) {
    case FilterReason::kOk: return "ok";
    case FilterReason::kTooShort: return "too_short";
    case FilterReason::kTooLong: return "too_long";
    case FilterReason::kNonEnglish: return "non_english";
    case FilterReason::kNumericMathematical: return "numeric_mathematical";
    case FilterReason::kLatexOrGarbled: return "latex_or_garbled";
  }
  return "ok";
}

struct FilterVerdict {
  bool keep = true;
  FilterReason reason = FilterReason::kOk;

  bool operator==(const FilterVerdict&) const = default;
};

struct CleaningConfig {
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 128;
  double stopword_ratio_min = 0.05;
  double digit_symbol_ratio_max = 0.5;
  std::vector<std::string> latex_markers{"\\frac", "\\begin", "\\cite", "$$", "\\alpha"};

  void validate() const {
    if (min_tokens < 1) fail(ErrorCode::kValidation, "min_tokens must be >= 1");
    if (min_tokens >= max_tokens) fail(ErrorCode::kValidation, "min_tokens must be < max_tokens");
    if (!(stopword_ratio_min >= 0.0 && stopword_ratio_min <= 1.0)) {
      fail(ErrorCode::kValidation, "stopword_ratio_min must be in [0,1]");
    }
    if (!(digit_symbol_ratio_max >= 0.0 && digit_symbol_ratio_max <= 1.0)) {
      fail(ErrorCode::kValidation, "digit_symbol_ratio_max must be in [0,1]");
    }
  }
};

inline const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> kWords{
      "a", "about", "above", "after", "again", "against", "all", "also", "am",
      "an", "and", "any", "are", "as", "at", "be", "because", "been", "before",
      "being", "below", "between", "both", "but", "by", "can", "could", "did",
      "do", "does", "doing", "down", "during", "each", "either", "few", "for",
      "from", "further", "had", "has", "have", "having", "he", "her", "here",
      "hers", "him", "his", "how", "however", "i", "if", "in", "into", "is",
      "it", "its", "itself", "may", "might", "more", "most", "must", "my",
      "neither", "no", "nor", "not", "of", "off", "on", "once", "only", "or",
      "other", "our", "ours", "out", "over", "own", "same", "she", "should",
      "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "then", "there", "these", "they", "this", "those", "through", "thus",
      "to", "too", "under", "until", "up", "upon", "very", "was", "we", "were",
      "what", "when", "where", "whether", "which", "while", "who", "whom",
      "why", "will", "with", "within", "without", "would", "you", "your"};
  return kWords;
}

namespace detail {

inline bool is_garbled(const std::vector<UChar32>& cps) {
  for (UChar32 c : cps) {
    if (c == 0xFFFD) return true;
    if (u_iscntrl(c) && !text::is_space(c)) return true;
  }
  return false;
}

}  // namespace detail

// Checks run in a fixed order: length, latex/garbled, numeric, language.
inline FilterVerdict clean_filter(std::string_view raw, const CleaningConfig& cfg) {
  auto reject = [](FilterReason r) { return FilterVerdict{false, r}; };
  const std::string normalized = text::nfc(raw);
  const auto tokens = text::whitespace_tokens(normalized);
  if (tokens.size() < cfg.min_tokens) return reject(FilterReason::kTooShort);
  if (tokens.size() > cfg.max_tokens) return reject(FilterReason::kTooLong);

  for (const auto& marker : cfg.latex_markers) {
    if (!marker.empty() && normalized.find(marker) != std::string::npos) {
      return reject(FilterReason::kLatexOrGarbled);
    }
  }
  const auto cps = text::codepoints(normalized);
  if (detail::is_garbled(cps)) return reject(FilterReason::kLatexOrGarbled);

  std::size_t visible = 0;
  std::size_t letters = 0;
  for (UChar32 c : cps) {
    if (text::is_space(c)) continue;
    ++visible;
    if (u_isalpha(c)) ++letters;
  }
  const double non_letter_ratio =
      visible == 0 ? 1.0 : static_cast<double>(visible - letters) / static_cast<double>(visible);
  if (non_letter_ratio > cfg.digit_symbol_ratio_max) {
    return reject(FilterReason::kNumericMathematical);
  }

  const auto& stop = english_stopwords();
  std::size_t stop_hits = 0;
  for (const auto& tok : tokens) {
    const auto words = text::word_tokens(tok);
    if (words.size() == 1 && stop.count(words.front())) ++stop_hits;
  }
  const double stop_ratio = static_cast<double>(stop_hits) / static_cast<double>(tokens.size());
  if (stop_ratio < cfg.stopword_ratio_min) return reject(FilterReason::kNonEnglish);
  return {};
}

// Lazily decodes one PaperRecord per line. Malformed lines (bad JSON,
// schema violations, duplicate paper ids) are skipped and counted. When
// the stream is exhausted, more than half of the lines being malformed is
// reported as a corpus-format error.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in) : reader_(in) {}

  std::optional<PaperRecord> next() {
    while (auto line = reader_.next()) {
      ++lines_;
      try {
        PaperRecord rec = paper_from_json(json::parse(*line));
        if (!seen_.insert(rec.paper_id).second) {
          fail(ErrorCode::kSchema, "duplicate paper_id " + rec.paper_id);
        }
        return rec;
      } catch (const json::exception&) {
        skipped_lines_.push_back(reader_.line_no());
      } catch (const Error&) {
        skipped_lines_.push_back(reader_.line_no());
      }
    }
    if (skipped_lines_.size() * 2 > lines_) {
      fail(ErrorCode::kCorpusFormat,
           std::to_string(skipped_lines_.size()) + " of " + std::to_string(lines_) +
               " corpus lines are malformed");
    }
    return std::nullopt;
  }

  std::size_t skipped() const { return skipped_lines_.size(); }
  const std::vector<std::size_t>& skipped_lines() const { return skipped_lines_; }

 private:
  jsonl::LineReader reader_;
  std::size_t lines_ = 0;
  std::vector<std::size_t> skipped_lines_;
  std::set<std::string> seen_;
};

inline std::vector<PaperRecord> parse_corpus(std::istream& in, std::size_t* skipped = nullptr) {
  CorpusReader reader(in);
  std::vector<PaperRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  if (skipped) *skipped = reader.skipped();
  return out;
}

struct CleaningReport {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejected_by_reason;
  std::size_t malformed_lines = 0;

  void add(const FilterVerdict& v) {
    ++total;
    if (v.keep) {
      ++kept;
    } else {
      ++rejected;
      ++rejected_by_reason[std::string(filter_reason_name(v.reason))];
    }
  }

  void merge(const CleaningReport& other) {
    total += other.total;
    kept += other.kept;
    rejected += other.rejected;
    malformed_lines += other.malformed_lines;
    for (const auto& [k, n] : other.rejected_by_reason) rejected_by_reason[k] += n;
  }

  json to_json() const {
    json reasons = json::object();
    for (auto r : {FilterReason::kTooShort, FilterReason::kTooLong, FilterReason::kNonEnglish,
                   FilterReason::kNumericMathematical, FilterReason::kLatexOrGarbled}) {
      const std::string name(filter_reason_name(r));
      auto it = rejected_by_reason.find(name);
      reasons[name] = it == rejected_by_reason.end() ? 0 : it->second;
    }
    return json{{"total", total},
                {"kept", kept},
                {"rejected", rejected},
                {"rejected_by_reason", reasons},
                {"malformed_lines", malformed_lines}};
  }
};

// One record per kept sentence. Context is the adjacent raw sentence even
// when that neighbour was itself filtered out.
inline std::vector<SentenceRecord> build_context_windows(const PaperRecord& paper,
                                                         const CleaningConfig& cfg,
                                                         CleaningReport* report = nullptr) {
  std::vector<SentenceRecord> out;
  const auto& sents = paper.sentences;
  for (std::size_t i = 0; i < sents.size(); ++i) {
    const FilterVerdict v = clean_filter(sents[i], cfg);
    if (report) report->add(v);
    if (!v.keep) continue;
    SentenceRecord rec;
    rec.paper_id = paper.paper_id;
    rec.position = static_cast<std::int64_t>(i);
    rec.text = sents[i];
    if (i > 0) rec.prev_text = sents[i - 1];
    if (i + 1 < sents.size()) rec.next_text = sents[i + 1];
    rec.sentence_id = make_sentence_id(rec.paper_id, rec.position, rec.text);
    out.push_back(std::move(rec));
  }
  return out;
}

struct IngestResult {
  std::vector<SentenceRecord> sentences;
  CleaningReport report;
};

// Streams the corpus in bounded batches and builds context windows per
// paper across `jobs` workers. Output order follows input order for any
// worker count.
inline IngestResult ingest(std::istream& corpus, const CleaningConfig& cfg, std::size_t jobs = 1,
                           std::size_t batch_papers = 1024) {
  cfg.validate();
  struct PerPaper {
    std::vector<SentenceRecord> sentences;
    CleaningReport report;
  };
  auto build = [&cfg](const PaperRecord& p) {
    PerPaper part;
    part.sentences = build_context_windows(p, cfg, &part.report);
    return part;
  };

  IngestResult result;
  CorpusReader reader(corpus);
  std::vector<PaperRecord> batch;
  auto flush = [&] {
    for (auto& part : parallel_map(batch, build, jobs)) {
      result.report.merge(part.report);
      for (auto& s : part.sentences) result.sentences.push_back(std::move(s));
    }
    batch.clear();
  };
  while (auto rec = reader.next()) {
    batch.push_back(std::move(*rec));
    if (batch.size() >= batch_papers) flush();
  }
  flush();
  result.report.malformed_lines = reader.skipped();
  return result;
}

}  // namespace scichal
