#pragma once

#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scichal/error.hpp"

namespace scichal {

using json = nlohmann::json;

namespace jsonl {

// Reads non-blank lines from a stream with line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Returns the next non-blank line, or nullopt at end of stream.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    if (in_.bad()) fail(ErrorCode::kIo, "read error", line_no_);
    return std::nullopt;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  return out;
}

// Strict reader: every line must parse and convert, otherwise a schema
// error carrying the line number is thrown.
template <typename T>
std::vector<T> read_all(std::istream& in,
                        const std::function<T(const json&)>& convert) {
  std::vector<T> out;
  LineReader reader(in);
  while (auto line = reader.next()) {
    try {
      out.push_back(convert(json::parse(*line)));
    } catch (const json::exception& e) {
      fail(ErrorCode::kSchema, e.what(), reader.line_no());
    } catch (const Error& e) {
      fail(e.code() == ErrorCode::kValidation ? ErrorCode::kSchema : e.code(),
           e.what(), reader.line_no());
    }
  }
  return out;
}

template <typename T>
std::vector<T> read_file(const std::string& path,
                         const std::function<T(const json&)>& convert) {
  auto in = open_input(path);
  return read_all<T>(in, convert);
}

inline void write_line(std::ostream& out, const json& j) {
  out << j.dump() << '\n';
}

template <typename T, typename Fn>
void write_all(std::ostream& out, const std::vector<T>& items, Fn&& to) {
  for (const auto& item : items) write_line(out, to(item));
}

}  // namespace jsonl

// Field helpers used by the from_json converters.
namespace field {

inline const json& required(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorCode::kSchema, "record is not an object");
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::kSchema, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string(const json& j, const char* key) {
  const json& v = required(j, key);
  if (!v.is_string()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

// Absent and null both decode to nullopt.
inline std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

inline std::optional<double> optional_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

inline double number(const json& j, const char* key) {
  const json& v = required(j, key);
  if (!v.is_number()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline bool boolean(const json& j, const char* key) {
  const json& v = required(j, key);
  if (!v.is_boolean()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

inline std::int64_t integer(const json& j, const char* key) {
  const json& v = required(j, key);
  if (!v.is_number_integer()) fail(ErrorCode::kSchema, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

inline json nullable(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json nullable(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace field
}  // namespace scichal
