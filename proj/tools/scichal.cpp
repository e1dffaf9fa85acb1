// scichal: command-line driver for every pipeline stage.
//
// Stages read and write JSON lines. Errors go to stderr as one JSON object
// {"error": {"stage", "code", "message", "line"}} with a nonzero exit code.

#include <array>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scichal/scichal.hpp"
#include "scichal/server.hpp"

using namespace scichal;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool quiet = false;
};

Globals g;

void progress(const json& event) {
  if (!g.quiet) std::cerr << event.dump() << '\n';
}

template <typename T>
std::vector<T> read_jsonl(const std::string& path, T (*convert)(const json&)) {
  return jsonl::read_file<T>(path, std::function<T(const json&)>(convert));
}

template <typename T, typename Fn>
void write_jsonl(const std::string& path, const std::vector<T>& items, Fn&& to) {
  auto out = jsonl::open_output(path);
  jsonl::write_all(out, items, to);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  auto out = jsonl::open_output(path);
  out << body;
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Gold label files carry a LabelPair per sentence (the aggregate stage's
// output or any hand-written equivalent).
struct GoldRow {
  std::string sentence_id;
  LabelPair labels;
};

GoldRow gold_from_json(const json& j) { return {field::string(j, "sentence_id"), label_pair_from_json(j)}; }

struct SplitRow {
  std::string sentence_id;
  Split split;
};

SplitRow split_row_from_json(const json& j) {
  return {field::string(j, "sentence_id"), split_from_name(field::string(j, "split"))};
}

void check_threshold(double t, const char* name) {
  if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::kValidation, std::string(name) + " must be in (0,1)");
}

KeywordLexicon lexicon_or_seed(const std::string& path) {
  if (path.empty()) return seed_lexicon();
  return load_lexicon(path);
}

std::array<double, 3> parse_ratios(const std::string& s) {
  std::array<double, 3> r{};
  std::stringstream ss(s);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) fail(ErrorCode::kValidation, "ratios must list three values");
    try {
      r[i++] = std::stod(part);
    } catch (const std::exception&) {
      fail(ErrorCode::kValidation, "ratio '" + part + "' is not a number");
    }
  }
  if (i != 3) fail(ErrorCode::kValidation, "ratios must list three values");
  return r;
}

// ---------------------------------------------------------------------------

struct IngestOpts {
  std::string corpus, out, report;
  CleaningConfig cfg;
};

void run_ingest(const IngestOpts& o) {
  auto in = jsonl::open_input(o.corpus);
  IngestResult r = ingest(in, o.cfg, g.jobs);
  write_jsonl(o.out, r.sentences, [](const SentenceRecord& s) { return to_json(s); });
  if (!o.report.empty()) write_json(o.report, r.report.to_json());
  progress({{"stage", "ingest"}, {"report", r.report.to_json()}});
}

struct SampleOpts {
  std::string sentences, lexicon, out;
  std::size_t n = 0;
  double nonkeyword_fraction = 0.25;
};

void run_sample(const SampleOpts& o) {
  const auto sentences = read_jsonl(o.sentences, sentence_from_json);
  const auto lex = lexicon_or_seed(o.lexicon);
  const SampleResult r = sample_candidates(sentences, lex, o.n, o.nonkeyword_fraction, g.seed);
  std::vector<json> rows;
  for (std::size_t i = 0; i < r.sentence_ids.size(); ++i) {
    rows.push_back(json{{"sentence_id", r.sentence_ids[i]}, {"keyword_pool", i < r.keyword_count}});
  }
  write_jsonl(o.out, rows, [](const json& j) { return j; });
  for (const auto& w : r.warnings) progress({{"stage", "sample"}, {"warning", w}});
  progress({{"stage", "sample"}, {"keyword", r.keyword_count}, {"nonkeyword", r.nonkeyword_count}});
}

struct AggregateOpts {
  std::string annotations, out, agreement;
};

void run_aggregate(const AggregateOpts& o) {
  const auto sets = read_jsonl(o.annotations, annotation_set_from_json);
  std::set<std::string> seen;
  std::vector<json> rows;
  std::size_t ties = 0;
  for (const auto& s : sets) {
    if (!seen.insert(s.sentence_id).second) fail(ErrorCode::kSchema, "duplicate sentence_id " + s.sentence_id);
    const AggregatedLabels a = aggregate_labels(s);
    json j = to_json(a.gold);
    j["sentence_id"] = s.sentence_id;
    j["challenge_tie"] = a.challenge_tie;
    j["direction_tie"] = a.direction_tie;
    ties += a.challenge_tie || a.direction_tie;
    rows.push_back(std::move(j));
  }
  write_jsonl(o.out, rows, [](const json& j) { return j; });
  if (!o.agreement.empty()) {
    json pairs = json::array();
    for (const auto& p : all_pairs_agreement(sets)) {
      pairs.push_back(json{{"gold_annotator", p.gold_annotator},
                           {"other_annotator", p.other_annotator},
                           {"sentences", p.scores.sentences},
                           {"micro_f1", p.scores.micro_f1},
                           {"macro_f1", p.scores.macro_f1},
                           {"challenge_f1", p.scores.challenge_f1},
                           {"direction_f1", p.scores.direction_f1}});
    }
    write_json(o.agreement, json{{"both_empty_f1", 1.0}, {"pairs", pairs}});
  }
  progress({{"stage", "aggregate"}, {"sentences", sets.size()}, {"ties", ties}});
}

struct SplitOpts {
  std::string gold, sentences, out, distribution;
  std::string ratios = "0.4,0.1,0.5";
};

std::vector<SplitExample> split_examples(const std::string& gold_path, const std::string& sentences_path) {
  std::map<std::string, std::string> paper_of;
  for (const auto& s : read_jsonl(sentences_path, sentence_from_json)) paper_of[s.sentence_id] = s.paper_id;
  std::vector<SplitExample> examples;
  for (const auto& row : read_jsonl(gold_path, gold_from_json)) {
    auto it = paper_of.find(row.sentence_id);
    if (it == paper_of.end()) fail(ErrorCode::kAlignment, "gold sentence " + row.sentence_id + " not in sentences file");
    examples.push_back({row.sentence_id, it->second, row.labels});
  }
  return examples;
}

void run_split(const SplitOpts& o) {
  const auto examples = split_examples(o.gold, o.sentences);
  const SplitAssignment a = stratified_split(examples, parse_ratios(o.ratios), g.seed);
  std::vector<json> rows;
  for (const auto& ex : examples) {
    rows.push_back(json{{"sentence_id", ex.sentence_id}, {"split", std::string(split_name(a.at(ex.sentence_id)))}});
  }
  write_jsonl(o.out, rows, [](const json& j) { return j; });
  const json dist = label_distribution(examples, &a).to_json();
  if (!o.distribution.empty()) write_json(o.distribution, dist);
  progress({{"stage", "split"}, {"distribution", dist}});
}

struct ScoreOpts {
  std::string scorer = "keyword";
  std::string sentences, lexicon, polarity_lexicon, zeroshot, logits, out;
  double neg_threshold = -0.1;
  double pos_threshold = 0.1;
  double zeroshot_threshold = 0.9;
  std::vector<std::string> challenge_sublabels, direction_sublabels;
  std::string strategy = "mean";
  double alpha = 2.0;
  std::string mask = "all";
  double challenge_threshold = 0.5;
  double direction_threshold = 0.5;
};

std::vector<ScoredSentence> combine_file(const ScoreOpts& o) {
  if (o.logits.empty()) fail(ErrorCode::kValidation, "--logits is required");
  check_threshold(o.challenge_threshold, "--challenge-threshold");
  check_threshold(o.direction_threshold, "--direction-threshold");
  const auto strategy = CombineStrategy::parse(o.strategy, o.alpha);
  const auto mask = parse_slice_mask(o.mask);
  const auto slices = read_jsonl(o.logits, slice_logits_from_json);
  return parallel_map(
      slices,
      [&](const SliceLogits& s) {
        return decide_scored(slice_combine(s, strategy, mask), o.challenge_threshold, o.direction_threshold);
      },
      g.jobs);
}

void run_score(const ScoreOpts& o) {
  std::vector<ScoredSentence> scored;
  if (o.scorer == "keyword" || o.scorer == "polarity") {
    if (o.sentences.empty()) fail(ErrorCode::kValidation, "--sentences is required for scorer " + o.scorer);
    const auto sentences = read_jsonl(o.sentences, sentence_from_json);
    if (o.scorer == "keyword") {
      const auto lex = lexicon_or_seed(o.lexicon);
      lex.validate();
      scored = parallel_map(
          sentences, [&](const SentenceRecord& s) { return ScoredSentence{s.sentence_id, std::nullopt, keyword_score(s, lex)}; },
          g.jobs);
    } else {
      PolarityLexicon lex = default_polarity_lexicon();
      if (!o.polarity_lexicon.empty()) {
        auto in = jsonl::open_input(o.polarity_lexicon);
        lex = parse_polarity_lexicon(in);
      }
      polarity_score("", lex, o.neg_threshold, o.pos_threshold);
      scored = parallel_map(
          sentences,
          [&](const SentenceRecord& s) {
            return ScoredSentence{s.sentence_id, std::nullopt, polarity_score(s, lex, o.neg_threshold, o.pos_threshold)};
          },
          g.jobs);
    }
  } else if (o.scorer == "zeroshot") {
    if (o.zeroshot.empty()) fail(ErrorCode::kValidation, "--zeroshot is required for scorer zeroshot");
    if (!(o.zeroshot_threshold > 0.0 && o.zeroshot_threshold <= 1.0)) {
      fail(ErrorCode::kValidation, "--zeroshot-threshold must be in (0,1]");
    }
    const bool restrict = !o.challenge_sublabels.empty() || !o.direction_sublabels.empty();
    const auto& cl = o.challenge_sublabels.empty() ? default_challenge_sublabels() : o.challenge_sublabels;
    const auto& dl = o.direction_sublabels.empty() ? default_direction_sublabels() : o.direction_sublabels;
    for (const auto& z : read_jsonl(o.zeroshot, zeroshot_from_json)) {
      const ZeroShotScores use = restrict ? restrict_sublabels(z, cl, dl) : z;
      scored.push_back({z.sentence_id, std::nullopt, zeroshot_decide(use, o.zeroshot_threshold)});
    }
  } else if (o.scorer == "logits") {
    scored = combine_file(o);
  } else {
    fail(ErrorCode::kValidation, "unknown scorer '" + o.scorer + "'");
  }
  write_jsonl(o.out, scored, [](const ScoredSentence& s) { return to_json(s); });
  progress({{"stage", "score"}, {"scorer", o.scorer}, {"sentences", scored.size()}});
}

struct CombineOpts {
  ScoreOpts score;
  std::string agreement;
};

void run_combine(const CombineOpts& o) {
  const auto scored = combine_file(o.score);
  write_jsonl(o.score.out, scored, [](const ScoredSentence& s) { return to_json(s); });
  if (!o.agreement.empty()) {
    const auto slices = read_jsonl(o.score.logits, slice_logits_from_json);
    write_json(o.agreement, agreement_stats(slices).to_json());
  }
  progress({{"stage", "combine"}, {"strategy", o.score.strategy}, {"sentences", scored.size()}});
}

struct EvaluateOpts {
  std::string pred, gold, split_file, split_name = "test", out, curve_csv, curve_svg;
  std::string sampling_scheme = "uniform";
  std::optional<double> challenge_threshold, direction_threshold;
};

void run_evaluate(const EvaluateOpts& o) {
  std::optional<std::set<std::string>> keep;
  if (!o.split_file.empty()) {
    const Split want = split_from_name(o.split_name);
    keep.emplace();
    for (const auto& r : read_jsonl(o.split_file, split_row_from_json)) {
      if (r.split == want) keep->insert(r.sentence_id);
    }
  }
  LabelMap gold;
  for (const auto& r : read_jsonl(o.gold, gold_from_json)) {
    if (!keep || keep->count(r.sentence_id)) gold[r.sentence_id] = r.labels;
  }
  LabelMap pred;
  for (auto s : read_jsonl(o.pred, scored_from_json)) {
    if (!gold.count(s.sentence_id)) continue;
    if (o.challenge_threshold || o.direction_threshold) {
      const double ct = o.challenge_threshold.value_or(0.5), dt = o.direction_threshold.value_or(0.5);
      s.decision = decide(s, ct, dt);
    }
    pred[s.sentence_id] = s.decision;
  }
  const EvaluationReport report = evaluate(pred, gold, o.sampling_scheme);
  write_json(o.out, report.to_json());
  if (!o.curve_csv.empty()) write_text(o.curve_csv, curve_csv(report));
  if (!o.curve_svg.empty()) write_text(o.curve_svg, curve_svg(report));
  progress({{"stage", "evaluate"}, {"sentences", report.sentences}, {"micro_f1", report.micro.f1}});
}

struct LinkOpts {
  std::string mentions, kb, sentences, out;
  double threshold = 0.9;
  bool no_idf = false;
};

void run_link(const LinkOpts& o) {
  auto mentions = read_jsonl(o.mentions, mention_from_json);
  if (!o.sentences.empty()) {
    std::map<std::string, std::string> text_of;
    for (const auto& s : read_jsonl(o.sentences, sentence_from_json)) text_of[s.sentence_id] = s.text;
    std::vector<MentionRecord> valid;
    for (auto& m : mentions) {
      auto it = text_of.find(m.sentence_id);
      if (it == text_of.end() || !mention_matches_sentence(m, it->second)) {
        progress({{"stage", "link"}, {"warning", "mention span does not match sentence " + m.sentence_id}});
        continue;
      }
      valid.push_back(std::move(m));
    }
    mentions = std::move(valid);
  }
  const KbIndex kb(read_jsonl(o.kb, kb_entity_from_json), KbIndex::Options{!o.no_idf});
  const auto links = link_mentions(mentions, kb, o.threshold, g.jobs);
  write_jsonl(o.out, links, [](const EntityLink& l) { return to_json(l); });
  progress({{"stage", "link"}, {"mentions", mentions.size()}, {"links", links.size()}});
}

struct VocabOpts {
  std::string links, out;
  std::size_t min_sentences = 10;
  std::size_t top_k = 30000;
};

void run_vocab(const VocabOpts& o) {
  const auto vocab = build_entity_vocabulary(read_jsonl(o.links, entity_link_from_json), o.min_sentences, o.top_k);
  write_jsonl(o.out, vocab, [](const VocabEntry& v) { return to_json(v); });
  progress({{"stage", "vocab"}, {"entities", vocab.size()}});
}

struct IndexOpts {
  std::string scored, links, vocab, sentences, corpus, kb, out;
  BuildParams params;
};

void run_index(const IndexOpts& o) {
  BuildInputs in;
  in.scored = read_jsonl(o.scored, scored_from_json);
  in.links = read_jsonl(o.links, entity_link_from_json);
  in.vocab = read_jsonl(o.vocab, vocab_entry_from_json);
  in.sentences = read_jsonl(o.sentences, sentence_from_json);
  if (!o.corpus.empty()) {
    auto corpus = jsonl::open_input(o.corpus);
    in.papers = parse_corpus(corpus);
  }
  if (!o.kb.empty()) in.kb = read_jsonl(o.kb, kb_entity_from_json);
  std::vector<std::string> warnings;
  const IndexSnapshot idx = build_index(in, o.params, &warnings);
  persist(idx, o.out);
  for (const auto& w : warnings) progress({{"stage", "index"}, {"warning", w}});
  progress({{"stage", "index"}, {"manifest", service::manifest_summary(idx.manifest)}});
}

struct ServeOpts {
  std::string snapshot, bind, cors_origin;
  bool no_log = false;
};

int run_serve(const ServeOpts& o) {
  service::ServerConfig cfg;
  cfg.snapshot_path = o.snapshot;
  if (cfg.snapshot_path.empty()) fail(ErrorCode::kValidation, "--snapshot or SNAPSHOT_PATH is required");
  if (!o.bind.empty()) service::parse_bind_address(o.bind, cfg);
  if (!o.cors_origin.empty()) cfg.cors_origin = o.cors_origin;
  cfg.log_requests = !o.no_log;
  return service::run_server(cfg);
}

struct StatsOpts {
  std::string snapshot, logits, gold, sentences, split_file, out;
};

void run_stats(const StatsOpts& o) {
  json report = json::object();
  if (!o.snapshot.empty()) {
    const IndexSnapshot idx = load(o.snapshot);
    report["snapshot"] = to_json(idx.manifest);
  }
  if (!o.logits.empty()) report["slice_agreement"] = agreement_stats(read_jsonl(o.logits, slice_logits_from_json)).to_json();
  if (!o.gold.empty()) {
    std::vector<SplitExample> examples;
    if (!o.sentences.empty()) {
      examples = split_examples(o.gold, o.sentences);
    } else {
      for (const auto& r : read_jsonl(o.gold, gold_from_json)) examples.push_back({r.sentence_id, "", r.labels});
    }
    if (!o.split_file.empty()) {
      SplitAssignment a;
      for (const auto& r : read_jsonl(o.split_file, split_row_from_json)) a[r.sentence_id] = r.split;
      report["label_distribution"] = label_distribution(examples, &a).to_json();
    } else {
      report["label_distribution"] = label_distribution(examples).to_json();
    }
  }
  if (report.empty()) fail(ErrorCode::kValidation, "stats needs --snapshot, --logits or --gold");
  write_json(o.out, report);
}

void emit_error(const std::string& stage, const std::string& code, const std::string& message, std::size_t line) {
  json err{{"stage", stage}, {"code", code}, {"message", message}};
  err["line"] = line ? json(line) : json(nullptr);
  std::cerr << json{{"error", err}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scientific challenge and direction extraction pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag defaults; command-line flags take precedence");
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress events on stderr");

  IngestOpts ingest_o;
  auto* ingest_cmd = app.add_subcommand("ingest", "Clean the corpus and emit sentences with context windows");
  ingest_cmd->add_option("--corpus", ingest_o.corpus, "Corpus JSONL (one PaperRecord per line)")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest_o.out, "Output SentenceRecord JSONL")->required();
  ingest_cmd->add_option("--report", ingest_o.report, "Cleaning report JSON");
  ingest_cmd->add_option("--min-tokens", ingest_o.cfg.min_tokens, "Minimum whitespace tokens")->capture_default_str();
  ingest_cmd->add_option("--max-tokens", ingest_o.cfg.max_tokens, "Maximum whitespace tokens")->capture_default_str();
  ingest_cmd->add_option("--stopword-ratio-min", ingest_o.cfg.stopword_ratio_min, "Minimum English stopword ratio")->capture_default_str();
  ingest_cmd->add_option("--digit-symbol-ratio-max", ingest_o.cfg.digit_symbol_ratio_max, "Maximum non-letter character ratio")->capture_default_str();
  ingest_cmd->add_option("--latex-marker", ingest_o.cfg.latex_markers, "LaTeX marker (repeatable, replaces the defaults)");

  SampleOpts sample_o;
  auto* sample_cmd = app.add_subcommand("sample", "Draw annotation candidates with keyword upsampling");
  sample_cmd->add_option("--sentences", sample_o.sentences, "SentenceRecord JSONL")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--lexicon", sample_o.lexicon, "Keyword lexicon file (default: built-in seed terms)")->check(CLI::ExistingFile);
  sample_cmd->add_option("-n,--n-total", sample_o.n, "Number of candidates")->required();
  sample_cmd->add_option("--nonkeyword-fraction", sample_o.nonkeyword_fraction, "Share drawn from non-keyword sentences")->capture_default_str();
  sample_cmd->add_option("--out", sample_o.out, "Output JSONL of sentence ids")->required();

  AggregateOpts agg_o;
  auto* agg_cmd = app.add_subcommand("aggregate", "Majority-vote gold labels and annotator agreement");
  agg_cmd->add_option("--annotations", agg_o.annotations, "AnnotationSet JSONL")->required()->check(CLI::ExistingFile);
  agg_cmd->add_option("--out", agg_o.out, "Gold label JSONL")->required();
  agg_cmd->add_option("--agreement", agg_o.agreement, "Pairwise agreement report JSON");

  SplitOpts split_o;
  auto* split_cmd = app.add_subcommand("split", "Paper-disjoint stratified train/dev/test split");
  split_cmd->add_option("--gold", split_o.gold, "Gold label JSONL")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--sentences", split_o.sentences, "SentenceRecord JSONL (supplies paper ids)")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--ratios", split_o.ratios, "train,dev,test ratios")->capture_default_str();
  split_cmd->add_option("--out", split_o.out, "Split JSONL (sentence_id, split)")->required();
  split_cmd->add_option("--distribution", split_o.distribution, "Label distribution JSON");

  ScoreOpts score_o;
  auto add_combine_flags = [](CLI::App* cmd, ScoreOpts& o) {
    cmd->add_option("--logits", o.logits, "SliceLogits JSONL")->check(CLI::ExistingFile);
    cmd->add_option("--strategy", o.strategy, "mean | median | majority_vote | logodds_extremize")->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "Extremization factor (> 1)")->capture_default_str();
    cmd->add_option("--mask", o.mask, "Slices to combine: all, 12, 34, ...")->capture_default_str();
    cmd->add_option("--challenge-threshold", o.challenge_threshold, "Decision threshold on challenge probability")->capture_default_str();
    cmd->add_option("--direction-threshold", o.direction_threshold, "Decision threshold on direction probability")->capture_default_str();
    cmd->add_option("--out", o.out, "Scored sentence JSONL")->required();
  };
  auto* score_cmd = app.add_subcommand("score", "Score sentences with a baseline or combined logits");
  score_cmd->add_option("--scorer", score_o.scorer, "keyword | polarity | zeroshot | logits")->capture_default_str();
  score_cmd->add_option("--sentences", score_o.sentences, "SentenceRecord JSONL")->check(CLI::ExistingFile);
  score_cmd->add_option("--lexicon", score_o.lexicon, "Keyword lexicon file")->check(CLI::ExistingFile);
  score_cmd->add_option("--polarity-lexicon", score_o.polarity_lexicon, "word<TAB>valence file")->check(CLI::ExistingFile);
  score_cmd->add_option("--neg-threshold", score_o.neg_threshold, "Polarity at or below which a sentence is a challenge")->capture_default_str();
  score_cmd->add_option("--pos-threshold", score_o.pos_threshold, "Polarity at or above which a sentence is a direction")->capture_default_str();
  score_cmd->add_option("--zeroshot", score_o.zeroshot, "ZeroShotScores JSONL")->check(CLI::ExistingFile);
  score_cmd->add_option("--zeroshot-threshold", score_o.zeroshot_threshold, "Threshold on the max sub-label probability")->capture_default_str();
  score_cmd->add_option("--challenge-sublabel", score_o.challenge_sublabels, "Restrict challenge sub-labels (repeatable)");
  score_cmd->add_option("--direction-sublabel", score_o.direction_sublabels, "Restrict direction sub-labels (repeatable)");
  add_combine_flags(score_cmd, score_o);

  CombineOpts combine_o;
  auto* combine_cmd = app.add_subcommand("combine", "Combine four slice logits per sentence");
  add_combine_flags(combine_cmd, combine_o.score);
  combine_cmd->add_option("--agreement", combine_o.agreement, "Slice agreement histogram JSON");

  EvaluateOpts eval_o;
  auto* eval_cmd = app.add_subcommand("evaluate", "P/R/F1, AP, AUC-PR and PR curves against gold labels");
  eval_cmd->add_option("--pred", eval_o.pred, "Scored sentence JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", eval_o.gold, "Gold label JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", eval_o.split_file, "Split JSONL; restricts to --split-name")->check(CLI::ExistingFile);
  eval_cmd->add_option("--split-name", eval_o.split_name, "train | dev | test")->capture_default_str();
  eval_cmd->add_option("--challenge-threshold", eval_o.challenge_threshold, "Re-threshold challenge probabilities");
  eval_cmd->add_option("--direction-threshold", eval_o.direction_threshold, "Re-threshold direction probabilities");
  eval_cmd->add_option("--sampling-scheme", eval_o.sampling_scheme, "Recorded with the metrics")->capture_default_str();
  eval_cmd->add_option("--out", eval_o.out, "Metrics report JSON (- for stdout)")->capture_default_str();
  eval_cmd->add_option("--curve-csv", eval_o.curve_csv, "PR curve CSV");
  eval_cmd->add_option("--curve-svg", eval_o.curve_svg, "PR curve SVG plot");

  LinkOpts link_o;
  auto* link_cmd = app.add_subcommand("link", "Link NER mentions to KB entities by trigram similarity");
  link_cmd->add_option("--mentions", link_o.mentions, "MentionRecord JSONL")->required()->check(CLI::ExistingFile);
  link_cmd->add_option("--kb", link_o.kb, "KbEntity JSONL")->required()->check(CLI::ExistingFile);
  link_cmd->add_option("--sentences", link_o.sentences, "SentenceRecord JSONL; drops mentions whose span mismatches")->check(CLI::ExistingFile);
  link_cmd->add_option("--threshold", link_o.threshold, "Minimum similarity")->capture_default_str();
  link_cmd->add_flag("--no-idf", link_o.no_idf, "Unit trigram weights instead of KB idf");
  link_cmd->add_option("--out", link_o.out, "EntityLink JSONL")->required();

  VocabOpts vocab_o;
  auto* vocab_cmd = app.add_subcommand("vocab", "Select the indexed entity vocabulary");
  vocab_cmd->add_option("--links", vocab_o.links, "EntityLink JSONL")->required()->check(CLI::ExistingFile);
  vocab_cmd->add_option("--min-sentences", vocab_o.min_sentences, "Minimum distinct sentences")->capture_default_str();
  vocab_cmd->add_option("--top-k", vocab_o.top_k, "Maximum vocabulary size")->capture_default_str();
  vocab_cmd->add_option("--out", vocab_o.out, "Vocabulary JSONL")->required();

  IndexOpts index_o;
  auto* index_cmd = app.add_subcommand("index", "Build and persist the search snapshot");
  index_cmd->add_option("--scored", index_o.scored, "Scored sentence JSONL")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--links", index_o.links, "EntityLink JSONL")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--vocab", index_o.vocab, "Vocabulary JSONL")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--sentences", index_o.sentences, "SentenceRecord JSONL")->required()->check(CLI::ExistingFile);
  index_cmd->add_option("--corpus", index_o.corpus, "Corpus JSONL for paper metadata")->check(CLI::ExistingFile);
  index_cmd->add_option("--kb", index_o.kb, "KbEntity JSONL for names and aliases")->check(CLI::ExistingFile);
  index_cmd->add_option("--challenge-threshold", index_o.params.challenge_threshold, "Indexing threshold")->capture_default_str();
  index_cmd->add_option("--direction-threshold", index_o.params.direction_threshold, "Indexing threshold")->capture_default_str();
  index_cmd->add_flag("--dedup", index_o.params.dedup_text, "Keep one sentence per normalized text");
  index_cmd->add_option("--out", index_o.out, "Snapshot file")->required();

  ServeOpts serve_o;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a snapshot over HTTP");
  serve_cmd->add_option("--snapshot", serve_o.snapshot, "Snapshot file")->envname("SNAPSHOT_PATH");
  serve_cmd->add_option("--bind", serve_o.bind, "host:port (default 127.0.0.1:8080)")->envname("BIND_ADDR");
  serve_cmd->add_option("--cors-origin", serve_o.cors_origin, "Allowed CORS origin")->envname("CORS_ORIGIN");
  serve_cmd->add_flag("--no-log", serve_o.no_log, "Disable request logging");

  StatsOpts stats_o;
  auto* stats_cmd = app.add_subcommand("stats", "Summaries of a snapshot, slice logits or gold labels");
  stats_cmd->add_option("--snapshot", stats_o.snapshot, "Snapshot file")->check(CLI::ExistingFile);
  stats_cmd->add_option("--logits", stats_o.logits, "SliceLogits JSONL")->check(CLI::ExistingFile);
  stats_cmd->add_option("--gold", stats_o.gold, "Gold label JSONL")->check(CLI::ExistingFile);
  stats_cmd->add_option("--sentences", stats_o.sentences, "SentenceRecord JSONL")->check(CLI::ExistingFile);
  stats_cmd->add_option("--split", stats_o.split_file, "Split JSONL")->check(CLI::ExistingFile);
  stats_cmd->add_option("--out", stats_o.out, "Report JSON (- for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const auto subs = app.get_subcommands();
    emit_error(subs.empty() ? "cli" : subs.front()->get_name(), "usage_error", e.what(), 0);
    return 64;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (stage == "ingest") run_ingest(ingest_o);
    else if (stage == "sample") run_sample(sample_o);
    else if (stage == "aggregate") run_aggregate(agg_o);
    else if (stage == "split") run_split(split_o);
    else if (stage == "score") run_score(score_o);
    else if (stage == "combine") run_combine(combine_o);
    else if (stage == "evaluate") run_evaluate(eval_o);
    else if (stage == "link") run_link(link_o);
    else if (stage == "vocab") run_vocab(vocab_o);
    else if (stage == "index") run_index(index_o);
    else if (stage == "serve") return run_serve(serve_o);
    else if (stage == "stats") run_stats(stats_o);
  } catch (const Error& e) {
    emit_error(stage, std::string(error_code_name(e.code())), e.what(), e.line());
    return 1;
  } catch (const std::exception& e) {
    emit_error(stage, "internal_error", e.what(), 0);
    return 1;
  }
  return 0;
}
