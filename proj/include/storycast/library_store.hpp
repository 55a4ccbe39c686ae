// Plain-file persistence for books and reading sessions.
//
//   <root>/books/<id>.book.json         canonical book documents
//   <root>/sessions/<id>.session.json   cast, phase snapshot and event log
//   <root>/cache/                       audio clips (see tts_gateway.hpp)
//
// Every file is replaced by write-then-rename, so a reader sees either the
// previous or the new version.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "storycast/casting.hpp"
#include "storycast/script_parser.hpp"
#include "storycast/session_engine.hpp"

namespace storycast {

struct BookSummary {
  std::string id;
  std::string title;
  AgeRange age_range;

  bool operator==(const BookSummary&) const = default;
};

/// A persisted session. `events` is empty while the cast is still being
/// edited; afterwards it starts with SessionCreated.
struct SessionRecord {
  std::string id;
  std::string book_id;
  CastSheet cast;
  SessionPhase phase = phase::NotStarted{};
  std::vector<SessionEvent> events;

  bool operator==(const SessionRecord&) const = default;
};

SessionRecord make_record(const ReadingSession& session);

class StorageError : public Error {
 public:
  explicit StorageError(const std::string& message) : Error("StorageError", message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("NotFound", what + " not found") {}
};

class LibraryStore {
 public:
  using WarningHandler = std::function<void(const std::string&)>;

  /// Creates the directory layout if needed. Warnings default to stderr.
  explicit LibraryStore(std::filesystem::path root, WarningHandler on_warning = {});

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::filesystem::path books_dir() const { return root_ / "books"; }
  [[nodiscard]] std::filesystem::path sessions_dir() const { return root_ / "sessions"; }
  [[nodiscard]] std::filesystem::path cache_dir() const { return root_ / "cache"; }

  /// Parses, validates and stores the canonical form. Replaces an existing
  /// book with the same id. Throws ParseError subclasses or StorageError.
  std::string import_book(const BookDocument& doc);

  /// Sorted by id. Unreadable files are skipped with a warning.
  [[nodiscard]] std::vector<BookSummary> list_books() const;

  /// Throws NotFound or ParseError.
  [[nodiscard]] BookScript load_book(const std::string& id) const;

  /// Refuses to shorten or rewrite an already stored event log.
  void save_session(const SessionRecord& record);

  /// Throws NotFound or StorageError.
  [[nodiscard]] SessionRecord load_session(const std::string& id) const;

  [[nodiscard]] std::vector<std::string> list_sessions() const;

 private:
  [[nodiscard]] std::filesystem::path book_path(const std::string& id) const;
  [[nodiscard]] std::filesystem::path session_path(const std::string& id) const;

  std::filesystem::path root_;
  WarningHandler on_warning_;
};

}  // namespace storycast
