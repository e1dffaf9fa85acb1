#pragma once

#include <algorithm>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scichal/corpus.hpp"
#include "scichal/text.hpp"

namespace scichal {

namespace detail {

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel);
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline const std::unordered_map<std::string, std::string>& lemma_exceptions() {
  static const std::unordered_map<std::string, std::string> kTable{
      {"is", "be"},         {"are", "be"},           {"was", "be"},
      {"were", "be"},       {"been", "be"},          {"being", "be"},
      {"has", "have"},      {"had", "have"},         {"having", "have"},
      {"does", "do"},       {"did", "do"},           {"done", "do"},
      {"children", "child"}, {"mice", "mouse"},      {"men", "man"},
      {"women", "woman"},   {"data", "data"},        {"analyses", "analysis"},
      {"hypotheses", "hypothesis"}, {"theses", "thesis"}, {"bases", "basis"},
      {"crises", "crisis"}, {"diagnoses", "diagnosis"}, {"criteria", "criterion"},
      {"phenomena", "phenomenon"}, {"bias", "bias"},  {"biases", "bias"},
      {"series", "series"}, {"species", "species"},  {"news", "news"},
      {"always", "always"}, {"perhaps", "perhaps"},  {"this", "this"},
      {"thus", "thus"},     {"its", "its"},          {"as", "as"},
      {"during", "during"}, {"nothing", "nothing"},  {"something", "something"},
      {"anything", "anything"}, {"everything", "everything"},
      {"bring", "bring"},   {"thing", "thing"},      {"things", "thing"},
      {"need", "need"},     {"indeed", "indeed"},    {"feed", "feed"},
      {"seed", "seed"},     {"speed", "speed"},      {"red", "red"},
      {"bed", "bed"},       {"shed", "shed"}};
  return kTable;
}

}  // namespace detail

namespace detail {

inline std::string lemmatize_once(std::string_view word) {
  using detail::ends_with;
  const auto& exceptions = detail::lemma_exceptions();
  std::string w(word);
  if (auto it = exceptions.find(w); it != exceptions.end()) return it->second;

  if (w.size() > 4 && ends_with(w, "ies")) {
    w = w.substr(0, w.size() - 3) + "y";
  } else if (w.size() > 4 && (ends_with(w, "sses") || ends_with(w, "ches") ||
                              ends_with(w, "shes") || ends_with(w, "xes") ||
                              ends_with(w, "zes"))) {
    w.resize(w.size() - 2);
  } else if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") &&
             !ends_with(w, "us") && !ends_with(w, "is")) {
    w.pop_back();
  }

  bool stripped_verb = false;
  if (w.size() > 5 && ends_with(w, "ing") && detail::has_vowel(w.substr(0, w.size() - 3))) {
    w.resize(w.size() - 3);
    stripped_verb = true;
  } else if (w.size() > 4 && ends_with(w, "ied")) {
    w = w.substr(0, w.size() - 3) + "y";
  } else if (w.size() > 4 && ends_with(w, "ed") && detail::has_vowel(w.substr(0, w.size() - 2))) {
    w.resize(w.size() - 2);
    stripped_verb = true;
  }
  if (stripped_verb && w.size() >= 3) {
    const char last = w.back();
    const char prev = w[w.size() - 2];
    if (last == prev && !detail::is_vowel(last) && last != 's' && last != 'z') w.pop_back();
  }
  if (w.size() > 4 && w.back() == 'e') w.pop_back();
  return w;
}

}  // namespace detail

// Deterministic suffix stripper: exceptions table, then plural -ies/-es/-s,
// then -ing/-ed with consonant undoubling, then a trailing -e, repeated to a
// fixed point so lemmatize(lemmatize(w)) == lemmatize(w). Lexicon terms and
// sentences go through the same function, so "explore", "explores",
// "explored" and "exploring" all meet at "explor".
inline std::string lemmatize(std::string_view word) {
  std::string w(word);
  for (int i = 0; i < 8; ++i) {
    std::string next = detail::lemmatize_once(w);
    if (next == w) break;
    w = std::move(next);
  }
  return w;
}

inline std::vector<std::string> lemma_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& w : text::word_tokens(s)) out.push_back(lemmatize(w));
  return out;
}

inline std::string lemmatize_phrase(std::string_view s) {
  std::string out;
  for (const auto& l : lemma_tokens(s)) {
    if (!out.empty()) out.push_back(' ');
    out += l;
  }
  return out;
}

// Terms are stored lemmatized; a phrase is a space-joined lemma sequence.
struct KeywordLexicon {
  std::vector<std::string> challenge_terms;
  std::vector<std::string> direction_terms;

  bool operator==(const KeywordLexicon&) const = default;

  void validate() const {
    for (const auto* terms : {&challenge_terms, &direction_terms}) {
      for (const auto& t : *terms) {
        if (t.empty()) fail(ErrorCode::kValidation, "lexicon term is empty");
        if (t != lemmatize_phrase(t)) {
          fail(ErrorCode::kValidation, "lexicon term not in lemmatized lowercase form: " + t);
        }
      }
    }
  }

  // Builds a lexicon from surface terms, lemmatizing and de-duplicating
  // while keeping first-seen order.
  static KeywordLexicon from_terms(const std::vector<std::string>& challenge,
                                   const std::vector<std::string>& direction) {
    KeywordLexicon lex;
    auto add = [](std::vector<std::string>& dst, const std::string& raw) {
      std::string term = lemmatize_phrase(raw);
      if (term.empty()) return;
      if (std::find(dst.begin(), dst.end(), term) == dst.end()) dst.push_back(term);
    };
    for (const auto& t : challenge) add(lex.challenge_terms, t);
    for (const auto& t : direction) add(lex.direction_terms, t);
    return lex;
  }
};

// Plain-text lexicon: "[challenge]" and "[direction]" section headers, one
// term per line, '#' starts a comment.
inline KeywordLexicon parse_lexicon(std::istream& in) {
  std::vector<std::string> challenge, direction;
  std::vector<std::string>* section = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (line == "[challenge]") {
      section = &challenge;
    } else if (line == "[direction]") {
      section = &direction;
    } else if (!section) {
      fail(ErrorCode::kSchema, "lexicon term outside a [challenge]/[direction] section", line_no);
    } else {
      if (lemmatize_phrase(line).empty()) fail(ErrorCode::kSchema, "lexicon term has no words", line_no);
      section->push_back(line);
    }
  }
  return KeywordLexicon::from_terms(challenge, direction);
}

inline KeywordLexicon load_lexicon(const std::string& path) {
  auto in = jsonl::open_input(path);
  return parse_lexicon(in);
}

// Cue words named as examples of the curated list; the full list is loaded
// from a lexicon file.
inline KeywordLexicon seed_lexicon() {
  return KeywordLexicon::from_terms({"unknown", "limit", "however", "hard"},
                                    {"suggest", "future work", "explore", "may"});
}

struct LexiconHits {
  std::vector<std::string> challenge;
  std::vector<std::string> direction;
};

namespace detail {

inline bool contains_sequence(const std::vector<std::string>& hay,
                              const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

}  // namespace detail

// Context-blind: a hit is any term whose lemma sequence occurs contiguously.
inline LexiconHits lexicon_match(std::string_view sentence, const KeywordLexicon& lex) {
  const auto lemmas = lemma_tokens(sentence);
  LexiconHits hits;
  for (const auto& t : lex.challenge_terms) {
    if (detail::contains_sequence(lemmas, detail::split_spaces(t))) hits.challenge.push_back(t);
  }
  for (const auto& t : lex.direction_terms) {
    if (detail::contains_sequence(lemmas, detail::split_spaces(t))) hits.direction.push_back(t);
  }
  return hits;
}

inline LexiconHits lexicon_match(const SentenceRecord& s, const KeywordLexicon& lex) {
  return lexicon_match(s.text, lex);
}

}  // namespace scichal
