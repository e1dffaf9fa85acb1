#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scichal {

enum class ErrorCode {
  kValidation,
  kNotFound,
  kIo,
  kCorpusFormat,
  kAlignment,
  kSchema,
  kCorruption,
  kVersion,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kCorpusFormat: return "corpus_format_error";
    case ErrorCode::kAlignment: return "alignment_error";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kCorruption: return "corruption_error";
    case ErrorCode::kVersion: return "version_error";
  }
  return "unknown_error";
}

// Single exception type for the library. `line` is the 1-based input line
// for errors raised while reading line-delimited files, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0)
      : std::runtime_error(message), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::size_t line = 0) {
  throw Error(code, message, line);
}

}  // namespace scichal
