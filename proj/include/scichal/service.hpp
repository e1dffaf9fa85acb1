#pragma once

#include <array>
#include <atomic>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scichal/index_store.hpp"

// Transport-independent request handlers for the search API. Every handler
// is a pure function of (snapshot, request) apart from the request counters
// reported by /stats.
namespace scichal::service {

inline constexpr const char* kApiVersion = "1";
inline constexpr std::size_t kMaxLimit = 100;

struct Response {
  int status = 200;
  json body;
};

using Params = std::multimap<std::string, std::string>;

inline Response error_response(const Error& e) {
  int status = 500;
  switch (e.code()) {
    case ErrorCode::kValidation:
    case ErrorCode::kSchema: status = 400; break;
    case ErrorCode::kNotFound: status = 404; break;
    default: status = 500; break;
  }
  return {status, json{{"api_version", kApiVersion},
                       {"error", {{"code", std::string(error_code_name(e.code()))}, {"message", e.what()}}}}};
}

struct SearchRequest {
  std::vector<std::string> entities;
  LabelFilter label = LabelFilter::kChallenge;
  std::size_t offset = 0;
  std::size_t limit = 10;

  void validate() const {
    if (entities.empty()) fail(ErrorCode::kValidation, "entities must list at least one entity id");
    if (limit < 1 || limit > kMaxLimit) fail(ErrorCode::kValidation, "limit must be in [1, 100]");
  }
};

namespace detail {

inline std::optional<std::string> param(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return it->second;
}

inline std::size_t parse_count(const std::string& s, const char* name) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorCode::kValidation, std::string(name) + " must be a non-negative integer");
  }
  return v;
}

inline void split_csv(const std::string& s, std::vector<std::string>& out) {
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!part.empty()) out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
}

inline std::string_view label_filter_name(LabelFilter f) {
  switch (f) {
    case LabelFilter::kChallenge: return "challenge";
    case LabelFilter::kDirection: return "direction";
    case LabelFilter::kBoth: return "both";
  }
  return "challenge";
}

}  // namespace detail

// Query parameters: entities=A,B (or repeated entity=A), label, offset, limit.
inline SearchRequest parse_search_request(const Params& p) {
  SearchRequest r;
  if (auto v = detail::param(p, "entities")) detail::split_csv(*v, r.entities);
  auto range = p.equal_range("entity");
  for (auto it = range.first; it != range.second; ++it) {
    if (!it->second.empty()) r.entities.push_back(it->second);
  }
  if (auto v = detail::param(p, "label")) r.label = parse_label_filter(*v);
  if (auto v = detail::param(p, "offset")) r.offset = detail::parse_count(*v, "offset");
  if (auto v = detail::param(p, "limit")) r.limit = detail::parse_count(*v, "limit");
  r.validate();
  return r;
}

// JSON body: {"entities": [...], "label": "...", "offset": n, "limit": n}.
inline SearchRequest parse_search_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    fail(ErrorCode::kValidation, "request body is not valid JSON");
  }
  if (!j.is_object()) fail(ErrorCode::kValidation, "request body must be an object");
  SearchRequest r;
  const auto& ents = j.value("entities", json::array());
  if (!ents.is_array()) fail(ErrorCode::kValidation, "entities must be an array");
  for (const auto& e : ents) {
    if (!e.is_string()) fail(ErrorCode::kValidation, "entities must be strings");
    r.entities.push_back(e.get<std::string>());
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) fail(ErrorCode::kValidation, "label must be a string");
    r.label = parse_label_filter(j["label"].get<std::string>());
  }
  for (const char* key : {"offset", "limit"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
      fail(ErrorCode::kValidation, std::string(key) + " must be a non-negative integer");
    }
    (std::string_view(key) == "offset" ? r.offset : r.limit) = j[key].get<std::size_t>();
  }
  r.validate();
  return r;
}

inline json sentence_json(const IndexedSentence& s) {
  return json{{"sentence_id", s.sentence.sentence_id},
              {"text", s.sentence.text},
              {"prev_text", field::nullable(s.sentence.prev_text)},
              {"next_text", field::nullable(s.sentence.next_text)},
              {"position", s.sentence.position},
              {"challenge", s.decision.challenge},
              {"direction", s.decision.direction},
              {"challenge_prob", s.challenge_prob()},
              {"direction_prob", s.direction_prob()},
              {"entity_ids", s.entity_ids},
              {"paper", to_json(s.paper)}};
}

inline json manifest_summary(const Manifest& m) {
  return json{{"format_version", m.format_version},
              {"sentence_count", m.sentence_count},
              {"entity_count", m.entity_count},
              {"challenge_sentences", m.challenge_sentences},
              {"direction_sentences", m.direction_sentences},
              {"corpus_fingerprint", m.corpus_fingerprint}};
}

class SearchService {
 public:
  enum Endpoint : std::size_t { kSearch, kAutocomplete, kCooccurring, kSentence, kStats, kHealth, kEndpointCount };

  explicit SearchService(std::shared_ptr<const IndexSnapshot> snapshot) : snapshot_(std::move(snapshot)) {
    if (!snapshot_) fail(ErrorCode::kValidation, "service needs a snapshot");
  }

  const IndexSnapshot& snapshot() const { return *snapshot_; }

  Response handle_search(const SearchRequest& req) const {
    return guarded(kSearch, [&] { return search_impl(req); });
  }

  Response handle_search(const Params& params) const {
    return guarded(kSearch, [&] { return search_impl(parse_search_request(params)); });
  }

  Response handle_autocomplete(const Params& params) const {
    return guarded(kAutocomplete, [&] {
      const std::string prefix = detail::param(params, "prefix").value_or("");
      std::size_t limit = 10;
      if (auto v = detail::param(params, "limit")) limit = detail::parse_count(*v, "limit");
      if (limit < 1 || limit > kMaxLimit) fail(ErrorCode::kValidation, "limit must be in [1, 100]");
      json items = json::array();
      for (const auto& s : autocomplete(*snapshot_, prefix, limit)) {
        items.push_back(json{{"alias", s.alias}, {"entity_id", s.entity_id}, {"sentence_count", s.sentence_count}});
      }
      return Response{200, json{{"api_version", kApiVersion}, {"prefix", prefix}, {"items", items}}};
    });
  }

  Response handle_cooccurring(const std::string& entity_id, const Params& params) const {
    return guarded(kCooccurring, [&] {
      std::size_t limit = kMaxLimit;
      if (auto v = detail::param(params, "limit")) limit = detail::parse_count(*v, "limit");
      if (limit < 1 || limit > kMaxLimit) fail(ErrorCode::kValidation, "limit must be in [1, 100]");
      json items = json::array();
      for (const auto& c : cooccurring(*snapshot_, entity_id, limit)) {
        const auto& e = snapshot_->entities.at(c.entity_id);
        items.push_back(json{{"entity_id", c.entity_id}, {"name", e.name}, {"count", c.count}});
      }
      return Response{200, json{{"api_version", kApiVersion}, {"entity_id", entity_id}, {"items", items}}};
    });
  }

  Response handle_sentence(const std::string& sentence_id) const {
    return guarded(kSentence, [&] {
      auto it = snapshot_->sentences.find(sentence_id);
      if (it == snapshot_->sentences.end()) fail(ErrorCode::kNotFound, "unknown sentence " + sentence_id);
      json body = sentence_json(it->second);
      body["api_version"] = kApiVersion;
      return Response{200, body};
    });
  }

  Response handle_stats() const {
    return guarded(kStats, [&] {
      json requests = json::object();
      static constexpr const char* kNames[] = {"search", "autocomplete", "cooccurring", "sentence", "stats", "health"};
      for (std::size_t i = 0; i < kEndpointCount; ++i) requests[kNames[i]] = counters_[i].load();
      return Response{200, json{{"api_version", kApiVersion},
                                {"manifest", to_json(snapshot_->manifest)},
                                {"requests", requests}}};
    });
  }

  Response handle_health() const {
    return guarded(kHealth, [&] {
      return Response{200, json{{"api_version", kApiVersion},
                                {"status", "ok"},
                                {"manifest", manifest_summary(snapshot_->manifest)}}};
    });
  }

  // Routes a GET request by path; used by the HTTP server and by replay.
  Response dispatch(const std::string& path, const Params& params) const {
    static const std::string kCo = "/cooccurring/";
    static const std::string kSent = "/sentence/";
    if (path == "/search") return handle_search(params);
    if (path == "/autocomplete") return handle_autocomplete(params);
    if (path == "/stats") return handle_stats();
    if (path == "/health") return handle_health();
    if (path.rfind(kCo, 0) == 0 && path.size() > kCo.size()) return handle_cooccurring(path.substr(kCo.size()), params);
    if (path.rfind(kSent, 0) == 0 && path.size() > kSent.size()) return handle_sentence(path.substr(kSent.size()));
    return error_response(Error(ErrorCode::kNotFound, "no route for " + path));
  }

 private:
  Response search_impl(const SearchRequest& req) const {
    req.validate();
    const QueryPage page = query(*snapshot_, req.entities, req.label, req.offset, req.limit);
    json items = json::array();
    for (const auto* s : page.items) items.push_back(sentence_json(*s));
    return Response{200, json{{"api_version", kApiVersion},
                              {"total", page.total},
                              {"offset", page.offset},
                              {"limit", page.limit},
                              {"label", std::string(detail::label_filter_name(req.label))},
                              {"entities", req.entities},
                              {"items", items}}};
  }

  template <typename Fn>
  Response guarded(Endpoint which, Fn&& fn) const {
    counters_[which].fetch_add(1, std::memory_order_relaxed);
    try {
      return fn();
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  std::shared_ptr<const IndexSnapshot> snapshot_;
  mutable std::array<std::atomic<std::size_t>, kEndpointCount> counters_{};
};

}  // namespace scichal::service
