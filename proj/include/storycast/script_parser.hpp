// Reading and writing `.book.json` documents.
//
// Document shape (keys in this order when serialized):
//
//   {
//     "format_version": 1,
//     "id": "...", "title": "...", "age_min": 3, "age_max": 6,
//     "characters": [{"id": "...", "name": "...", "portrait": "..."}],
//     "pages": [{"page": 1, "lines": [{"character": "...", "text": "..."}]}]
//   }
//
// `portrait` is optional. Line indices are not stored; they are assigned in
// document order while parsing. Unknown keys are rejected.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "storycast/script_model.hpp"

namespace storycast {

inline constexpr int kBookFormatVersion = 1;
inline constexpr std::string_view kBookFileExtension = ".book.json";

/// Raw bytes of a book file.
struct BookDocument {
  std::string bytes;
  bool operator==(const BookDocument&) const = default;
};

namespace detail {
inline std::string chomp(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}
}  // namespace detail

/// Common base of the three ways a document can be rejected.
class ParseError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public ParseError {
 public:
  SyntaxError(std::size_t byte_offset, const std::string& message)
      : ParseError("SyntaxError",
                   "syntax error at byte " + std::to_string(byte_offset) + ": " + message),
        byte_offset_(byte_offset) {}

  [[nodiscard]] std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class SchemaError : public ParseError {
 public:
  SchemaError(std::string path, const std::string& message)
      : ParseError("SchemaError", "schema error at " + (path.empty() ? "$" : path) + ": " + message),
        path_(std::move(path)) {}

  /// Location such as `characters[1].id`; empty for the document root.
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ValidationError : public ParseError {
 public:
  explicit ValidationError(ValidationReport report)
      : ParseError("ValidationError", "book failed validation:\n" + detail::chomp(describe(report))),
        report_(std::move(report)) {}

  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

class InvalidBook : public Error {
 public:
  explicit InvalidBook(const ValidationReport& report)
      : Error("InvalidBook", "book is not valid:\n" + detail::chomp(describe(report))), report_(report) {}

  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

/// Parses and validates. Throws SyntaxError, SchemaError or ValidationError.
BookScript parse_book(const BookDocument& doc);

/// Canonical form: fixed key order, 2-space indent, LF endings, trailing
/// newline. Throws InvalidBook when validate_book() reports anything.
BookDocument serialize_book(const BookScript& book);

}  // namespace storycast
