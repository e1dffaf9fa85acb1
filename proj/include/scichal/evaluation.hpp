#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scichal/annotation.hpp"
#include "scichal/corpus.hpp"

namespace scichal {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion counts;
};

// Precision is 0 with no predicted positives, recall is 0 with no gold
// positives, and F1 is 0 when P + R = 0.
inline PRF prf_from_counts(const Confusion& c) {
  PRF r;
  r.counts = c;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

using LabelMap = std::map<std::string, LabelPair>;

namespace detail {

template <typename A, typename B>
void require_aligned(const std::map<std::string, A>& a, const std::map<std::string, B>& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kAlignment, "prediction and gold sets differ in size (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
  }
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) fail(ErrorCode::kAlignment, "sentence id " + ia->first + " not aligned");
  }
}

}  // namespace detail

inline Confusion confusion(const LabelMap& pred, const LabelMap& gold, Label label) {
  detail::require_aligned(pred, gold);
  Confusion c;
  for (auto ip = pred.begin(), ig = gold.begin(); ip != pred.end(); ++ip, ++ig) {
    c.add(label_value(ig->second, label), label_value(ip->second, label));
  }
  return c;
}

inline PRF prf(const LabelMap& pred, const LabelMap& gold, Label label) {
  return prf_from_counts(confusion(pred, gold, label));
}

// Pools confusion counts over both labels.
inline PRF micro_prf(const LabelMap& pred, const LabelMap& gold) {
  Confusion c = confusion(pred, gold, Label::kChallenge);
  c += confusion(pred, gold, Label::kDirection);
  return prf_from_counts(c);
}

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;

  bool operator==(const PRPoint&) const = default;
};

struct PRCurve {
  std::vector<PRPoint> points;

  void validate() const {
    if (points.empty()) fail(ErrorCode::kValidation, "PR curve is empty");
    double last = 0;
    for (const auto& p : points) {
      for (double v : {p.recall, p.precision}) {
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::kValidation, "PR curve value outside [0,1]");
      }
      if (p.recall < last) fail(ErrorCode::kValidation, "PR curve recall must be non-decreasing");
      last = p.recall;
    }
  }
};

using ScoreMap = std::map<std::string, double>;
using GoldMap = std::map<std::string, bool>;

namespace detail {

// Descending score, ties by ascending sentence id.
inline std::vector<std::pair<std::string, double>> ranked(const ScoreMap& scores) {
  std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return v;
}

inline std::size_t count_positives(const GoldMap& gold) {
  return static_cast<std::size_t>(std::count_if(gold.begin(), gold.end(), [](const auto& g) { return g.second; }));
}

}  // namespace detail

// One point per distinct score, swept from high to low; tied scores enter
// together as a single threshold step.
inline PRCurve pr_curve(const ScoreMap& scores, const GoldMap& gold) {
  detail::require_aligned(scores, gold);
  const std::size_t positives = detail::count_positives(gold);
  if (positives == 0) fail(ErrorCode::kValidation, "PR curve needs at least one gold positive");
  const auto order = detail::ranked(scores);
  PRCurve curve;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    ++seen;
    tp += gold.at(order[i].first);
    if (i + 1 < order.size() && order[i + 1].second == order[i].second) continue;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                            static_cast<double>(tp) / static_cast<double>(seen), order[i].second});
  }
  return curve;
}

// Non-interpolated AP: mean of precision@k over the ranks k of gold
// positives, ranking by descending score with ties broken by sentence id.
inline double average_precision(const ScoreMap& scores, const GoldMap& gold) {
  detail::require_aligned(scores, gold);
  const std::size_t positives = detail::count_positives(gold);
  if (positives == 0) fail(ErrorCode::kValidation, "average precision needs at least one gold positive");
  const auto order = detail::ranked(scores);
  double sum = 0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!gold.at(order[k].first)) continue;
    ++tp;
    sum += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(positives);
}

// Trapezoidal area over recall, with the first point extended back to
// recall 0 at its own precision.
inline double auc_pr(const PRCurve& curve) {
  curve.validate();
  double area = 0;
  double prev_r = 0;
  double prev_p = curve.points.front().precision;
  for (const auto& p : curve.points) {
    area += (p.recall - prev_r) * (p.precision + prev_p) / 2.0;
    prev_r = p.recall;
    prev_p = p.precision;
  }
  return area;
}

// ---------------------------------------------------------------------------
// Report

struct LabelEvaluation {
  Label label = Label::kChallenge;
  PRF prf;
  std::optional<double> average_precision;
  std::optional<double> auc_pr;
  PRCurve curve;
};

struct EvaluationReport {
  std::vector<LabelEvaluation> labels;
  PRF micro;
  std::size_t sentences = 0;
  std::string sampling_scheme;

  json to_json() const {
    json j{{"sentences", sentences}, {"sampling_scheme", sampling_scheme}};
    auto prf_json = [](const PRF& r) {
      return json{{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                  {"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}};
    };
    double ap_sum = 0;
    std::size_t ap_n = 0;
    for (const auto& l : labels) {
      json curve = json::array();
      for (const auto& p : l.curve.points) {
        curve.push_back(json{{"recall", p.recall}, {"precision", p.precision}, {"threshold", p.threshold}});
      }
      j[std::string(label_name(l.label))] =
          json{{"prf", prf_json(l.prf)},
               {"average_precision", field::nullable(l.average_precision)},
               {"auc_pr", field::nullable(l.auc_pr)},
               {"pr_curve", curve}};
      if (l.average_precision) {
        ap_sum += *l.average_precision;
        ++ap_n;
      }
    }
    j["micro"] = prf_json(micro);
    j["map"] = ap_n ? json(ap_sum / static_cast<double>(ap_n)) : json(nullptr);
    return j;
  }
};

// Scores come from the prediction probabilities, or from the boolean
// decision when a scorer has none. Ranking metrics are left empty for a
// label with no gold positives.
inline EvaluationReport evaluate(const LabelMap& pred, const LabelMap& gold,
                                 std::string sampling_scheme = "uniform") {
  EvaluationReport report;
  report.sentences = gold.size();
  report.sampling_scheme = std::move(sampling_scheme);
  report.micro = micro_prf(pred, gold);
  for (Label label : {Label::kChallenge, Label::kDirection}) {
    LabelEvaluation le;
    le.label = label;
    le.prf = prf(pred, gold, label);
    ScoreMap scores;
    GoldMap g;
    for (const auto& [id, p] : pred) {
      scores[id] = label_prob(p, label).value_or(label_value(p, label) ? 1.0 : 0.0);
      g[id] = label_value(gold.at(id), label);
    }
    if (detail::count_positives(g) > 0) {
      le.curve = pr_curve(scores, g);
      le.average_precision = average_precision(scores, g);
      le.auc_pr = auc_pr(le.curve);
    }
    report.labels.push_back(std::move(le));
  }
  return report;
}

inline std::string curve_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "label,recall,precision,threshold\n";
  char buf[128];
  for (const auto& l : report.labels) {
    for (const auto& p : l.curve.points) {
      std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", std::string(label_name(l.label)).c_str(),
                    p.recall, p.precision, p.threshold);
      out << buf;
    }
  }
  return out.str();
}

// Precision-recall plot, one polyline per label.
inline std::string curve_svg(const EvaluationReport& report) {
  constexpr double kSize = 400, kPad = 40;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kPad << "\" height=\""
      << kSize + 2 * kPad << "\">\n";
  out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kPad + kSize / 2 << "\" y=\"" << kSize + 2 * kPad - 8
      << "\" text-anchor=\"middle\">recall</text>\n";
  out << "<text x=\"12\" y=\"" << kPad + kSize / 2 << "\" transform=\"rotate(-90 12 " << kPad + kSize / 2
      << ")\" text-anchor=\"middle\">precision</text>\n";
  const char* colors[] = {"#c0392b", "#2471a3"};
  std::size_t k = 0;
  for (const auto& l : report.labels) {
    const char* color = colors[k++ % 2];
    if (l.curve.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", kPad, kPad + kSize * (1 - l.curve.points.front().precision));
    out << buf;
    for (const auto& p : l.curve.points) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", kPad + kSize * p.recall, kPad + kSize * (1 - p.precision));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << kPad + 10 << "\" y=\"" << kPad + 20 * static_cast<double>(k) << "\" fill=\"" << color
        << "\">" << label_name(l.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace scichal
