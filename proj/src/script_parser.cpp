#include "storycast/script_parser.hpp"

#include <algorithm>
#include <initializer_list>
#include <limits>
#include <set>
#include <vector>

#include <json.hpp>

namespace storycast {

namespace {

using nlohmann::json;

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::string field_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

const char* type_name(const json& v) {
  return v.type_name();
}

void expect_object(const json& v, const std::string& path,
                   std::initializer_list<std::string_view> required,
                   std::initializer_list<std::string_view> optional = {}) {
  if (!v.is_object()) {
    throw SchemaError(path, std::string("expected object, found ") + type_name(v));
  }
  for (auto key : required) {
    if (!v.contains(key)) throw SchemaError(field_path(path, key), "missing required field");
  }
  for (const auto& [key, _] : v.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw SchemaError(field_path(path, key), "unknown field");
  }
}

std::string get_string(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = obj.at(std::string(key));
  if (!v.is_string()) {
    throw SchemaError(field_path(path, key), std::string("expected string, found ") + type_name(v));
  }
  return v.get<std::string>();
}

int get_int(const json& obj, std::string_view key, const std::string& path, std::int64_t min) {
  const auto& v = obj.at(std::string(key));
  if (!v.is_number_integer()) {
    throw SchemaError(field_path(path, key),
                      std::string("expected integer, found ") + type_name(v));
  }
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::numeric_limits<int>::max()) {
    throw SchemaError(field_path(path, key), "integer out of range");
  }
  const auto n = v.get<std::int64_t>();
  if (n < min || n > std::numeric_limits<int>::max()) {
    throw SchemaError(field_path(path, key),
                      "integer " + std::to_string(n) + " out of range (minimum " +
                          std::to_string(min) + ")");
  }
  return static_cast<int>(n);
}

const json& get_array(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = obj.at(std::string(key));
  if (!v.is_array()) {
    throw SchemaError(field_path(path, key), std::string("expected array, found ") + type_name(v));
  }
  return v;
}

json parse_json(const std::string& bytes) {
  // nlohmann keeps the last of duplicated keys; reject them instead.
  std::vector<std::set<std::string>> seen;
  auto on_event = [&](int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        seen.emplace_back();
        break;
      case json::parse_event_t::object_end:
        seen.pop_back();
        break;
      case json::parse_event_t::key: {
        auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second) {
          throw SchemaError("", "duplicate key '" + key + "'");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(bytes, on_event);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto pos = msg.find("] "); pos != std::string::npos) msg.erase(0, pos + 2);
    throw SyntaxError(e.byte == 0 ? 0 : e.byte - 1, msg);
  }
}

}  // namespace

BookScript parse_book(const BookDocument& doc) {
  const json root = parse_json(doc.bytes);

  expect_object(root, "",
                {"format_version", "id", "title", "age_min", "age_max", "characters", "pages"});
  const int version = get_int(root, "format_version", "", 0);
  if (version != kBookFormatVersion) {
    throw SchemaError("format_version", "unsupported format version " + std::to_string(version));
  }

  BookScript book;
  book.id = get_string(root, "id", "");
  book.title = get_string(root, "title", "");
  book.age_range.min = get_int(root, "age_min", "", 0);
  book.age_range.max = get_int(root, "age_max", "", 0);

  const auto& characters = get_array(root, "characters", "");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < characters.size(); ++i) {
    const auto path = index_path("characters", i);
    const auto& c = characters[i];
    expect_object(c, path, {"id", "name"}, {"portrait"});
    Character ch;
    ch.id = CharacterId(get_string(c, "id", path));
    if (!ids.insert(ch.id.value).second) {
      throw SchemaError(field_path(path, "id"), "duplicate character id '" + ch.id.value + "'");
    }
    ch.display_name = get_string(c, "name", path);
    if (c.contains("portrait")) ch.portrait = get_string(c, "portrait", path);
    book.characters.push_back(std::move(ch));
  }

  const auto& pages = get_array(root, "pages", "");
  for (std::size_t p = 0; p < pages.size(); ++p) {
    const auto page_path = index_path("pages", p);
    const auto& page = pages[p];
    expect_object(page, page_path, {"page", "lines"});
    const int number = get_int(page, "page", page_path, 1);
    const auto& lines = get_array(page, "lines", page_path);
    if (lines.empty()) {
      throw SchemaError(field_path(page_path, "lines"), "page has no lines");
    }
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const auto line_path = index_path(field_path(page_path, "lines"), l);
      expect_object(lines[l], line_path, {"character", "text"});
      Line line;
      line.index = book.lines.size();
      line.page = number;
      line.character = CharacterId(get_string(lines[l], "character", line_path));
      line.text = get_string(lines[l], "text", line_path);
      book.lines.push_back(std::move(line));
    }
  }

  if (auto report = validate_book(book); !report.empty()) {
    throw ValidationError(std::move(report));
  }
  return book;
}

BookDocument serialize_book(const BookScript& book) {
  if (auto report = validate_book(book); !report.empty()) throw InvalidBook(report);

  using ordered = nlohmann::ordered_json;
  ordered root;
  root["format_version"] = kBookFormatVersion;
  root["id"] = book.id;
  root["title"] = book.title;
  root["age_min"] = book.age_range.min;
  root["age_max"] = book.age_range.max;

  auto characters = ordered::array();
  for (const auto& c : book.characters) {
    ordered entry;
    entry["id"] = c.id.value;
    entry["name"] = c.display_name;
    if (c.portrait) entry["portrait"] = *c.portrait;
    characters.push_back(std::move(entry));
  }
  root["characters"] = std::move(characters);

  // Consecutive lines sharing a page number form one page object.
  auto pages = ordered::array();
  for (const auto& line : book.lines) {
    if (pages.empty() || pages.back()["page"].get<int>() != line.page) {
      ordered page;
      page["page"] = line.page;
      page["lines"] = ordered::array();
      pages.push_back(std::move(page));
    }
    ordered entry;
    entry["character"] = line.character.value;
    entry["text"] = line.text;
    pages.back()["lines"].push_back(std::move(entry));
  }
  root["pages"] = std::move(pages);

  return BookDocument{root.dump(2) + "\n"};
}

}  // namespace storycast
