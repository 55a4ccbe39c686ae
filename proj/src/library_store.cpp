#include "storycast/library_store.hpp"

#include <algorithm>
#include <iostream>

#include "file_io.hpp"
#include "storycast/json_codec.hpp"

namespace storycast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSessionFormatVersion = 1;
constexpr std::string_view kSessionExtension = ".session.json";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nlohmann::ordered_json record_to_json(const SessionRecord& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(codec::to_json(e));
  nlohmann::ordered_json out;
  out["format_version"] = kSessionFormatVersion;
  out["id"] = r.id;
  out["book_id"] = r.book_id;
  out["cast"] = codec::to_json(r.cast);
  out["phase"] = codec::to_json(r.phase);
  out["events"] = std::move(events);
  return out;
}

SessionRecord record_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("", "expected object");
  if (j.value("format_version", 0) != kSessionFormatVersion) {
    throw SchemaError("format_version", "unsupported session format");
  }
  SessionRecord r;
  r.id = j.at("id").get<std::string>();
  r.book_id = j.at("book_id").get<std::string>();
  r.cast = codec::cast_from_json(j.at("cast"), "cast");
  r.phase = codec::phase_from_json(j.at("phase"), "phase");
  const auto& events = j.at("events");
  if (!events.is_array()) throw SchemaError("events", "expected array");
  for (std::size_t i = 0; i < events.size(); ++i) {
    r.events.push_back(codec::event_from_json(events[i], "events[" + std::to_string(i) + "]"));
  }
  return r;
}

}  // namespace

SessionRecord make_record(const ReadingSession& session) {
  return SessionRecord{session.id(), session.book().id, session.cast(), session.phase(),
                       session.event_log()};
}

LibraryStore::LibraryStore(fs::path root, WarningHandler on_warning)
    : root_(std::move(root)),
      on_warning_(on_warning ? std::move(on_warning) : WarningHandler([](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
      })) {
  try {
    fs::create_directories(books_dir());
    fs::create_directories(sessions_dir());
    fs::create_directories(cache_dir());
  } catch (const fs::filesystem_error& e) {
    throw StorageError(e.what());
  }
}

fs::path LibraryStore::book_path(const std::string& id) const {
  return books_dir() / (id + std::string(kBookFileExtension));
}

fs::path LibraryStore::session_path(const std::string& id) const {
  return sessions_dir() / (id + std::string(kSessionExtension));
}

std::string LibraryStore::import_book(const BookDocument& doc) {
  const auto book = parse_book(doc);
  const auto canonical = serialize_book(book);
  try {
    detail::write_file_atomic(book_path(book.id), canonical.bytes);
  } catch (const std::exception& e) {
    throw StorageError(e.what());
  }
  return book.id;
}

std::vector<BookSummary> LibraryStore::list_books() const {
  std::vector<BookSummary> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(books_dir(), ec)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || !ends_with(name, kBookFileExtension)) continue;
    try {
      const auto book = parse_book(BookDocument{detail::read_file(entry.path())});
      const auto stem = name.substr(0, name.size() - kBookFileExtension.size());
      if (book.id != stem) {
        on_warning_("skipping " + name + ": book id '" + book.id + "' does not match file name");
        continue;
      }
      out.push_back(BookSummary{book.id, book.title, book.age_range});
    } catch (const std::exception& e) {
      on_warning_("skipping " + name + ": " + e.what());
    }
  }
  if (ec) throw StorageError("cannot list " + books_dir().string() + ": " + ec.message());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

BookScript LibraryStore::load_book(const std::string& id) const {
  if (!is_valid_identifier(id) || !fs::exists(book_path(id))) throw NotFound("book '" + id + "'");
  std::string bytes;
  try {
    bytes = detail::read_file(book_path(id));
  } catch (const std::exception& e) {
    throw StorageError(e.what());
  }
  return parse_book(BookDocument{std::move(bytes)});
}

void LibraryStore::save_session(const SessionRecord& record) {
  if (!is_valid_identifier(record.id)) {
    throw StorageError("session id '" + record.id + "' is not a valid file name");
  }
  if (fs::exists(session_path(record.id))) {
    const auto stored = load_session(record.id);
    const bool prefix = stored.events.size() <= record.events.size() &&
                        std::equal(stored.events.begin(), stored.events.end(),
                                   record.events.begin());
    if (!prefix) {
      throw StorageError("session '" + record.id + "': event log is append-only");
    }
  }
  try {
    detail::write_file_atomic(session_path(record.id), record_to_json(record).dump(2) + "\n");
  } catch (const std::exception& e) {
    throw StorageError(e.what());
  }
}

SessionRecord LibraryStore::load_session(const std::string& id) const {
  if (!is_valid_identifier(id) || !fs::exists(session_path(id))) {
    throw NotFound("session '" + id + "'");
  }
  try {
    return record_from_json(json::parse(detail::read_file(session_path(id))));
  } catch (const std::exception& e) {
    throw StorageError("session '" + id + "' is unreadable: " + e.what());
  }
}

std::vector<std::string> LibraryStore::list_sessions() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(sessions_dir(), ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && ends_with(name, kSessionExtension)) {
      ids.push_back(name.substr(0, name.size() - kSessionExtension.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace storycast
