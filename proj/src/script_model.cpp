#include "storycast/script_model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace storycast {

std::size_t utf8_length(std::string_view text) noexcept {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
      ++i;
      continue;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3;
      cp = lead & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (b & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

bool is_valid_identifier(std::string_view id) noexcept {
  if (id.empty() || id.size() > kMaxIdChars) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::string_view reader_kind(const Reader& r) noexcept {
  switch (r.index()) {
    case 0:
      return "agent";
    case 1:
      return "adult";
    default:
      return "child";
  }
}

std::string reader_label(const Reader& r) {
  if (const auto* agent = std::get_if<AgentVoice>(&r)) {
    return "Mate " + std::to_string(agent->voice.value());
  }
  return std::holds_alternative<HumanAdult>(r) ? "Adult" : "Child";
}

const Character* BookScript::find_character(const CharacterId& cid) const noexcept {
  auto it = std::find_if(characters.begin(), characters.end(),
                         [&](const Character& c) { return c.id == cid; });
  return it == characters.end() ? nullptr : &*it;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::InvalidBookId: return "InvalidBookId";
    case ViolationKind::EmptyTitle: return "EmptyTitle";
    case ViolationKind::InvalidAgeRange: return "InvalidAgeRange";
    case ViolationKind::NoCharacters: return "NoCharacters";
    case ViolationKind::NoLines: return "NoLines";
    case ViolationKind::InvalidCharacterId: return "InvalidCharacterId";
    case ViolationKind::DuplicateCharacter: return "DuplicateCharacter";
    case ViolationKind::InvalidDisplayName: return "InvalidDisplayName";
    case ViolationKind::NonContiguousIndex: return "NonContiguousIndex";
    case ViolationKind::InvalidPage: return "InvalidPage";
    case ViolationKind::DecreasingPage: return "DecreasingPage";
    case ViolationKind::UndeclaredSpeaker: return "UndeclaredSpeaker";
    case ViolationKind::EmptyLineText: return "EmptyLineText";
    case ViolationKind::LineTooLong: return "LineTooLong";
    case ViolationKind::InvalidUtf8: return "InvalidUtf8";
  }
  return "Unknown";
}

std::string describe(const ValidationReport& report) {
  std::ostringstream out;
  for (const auto& v : report) {
    out << to_string(v.kind);
    if (v.line) out << " at line " << *v.line;
    if (v.character) out << " at character " << *v.character;
    out << ": " << v.message << '\n';
  }
  return out.str();
}

namespace {

void check_utf8(ValidationReport& report, std::optional<std::size_t> line,
                std::optional<std::size_t> character, std::string_view what,
                std::string_view text) {
  if (!is_valid_utf8(text)) {
    report.push_back({ViolationKind::InvalidUtf8, line, character,
                      std::string(what) + " is not valid UTF-8"});
  }
}

}  // namespace

ValidationReport validate_book(const BookScript& book) {
  ValidationReport report;

  if (!is_valid_identifier(book.id)) {
    report.push_back({ViolationKind::InvalidBookId, {}, {},
                      "book id '" + book.id + "' does not match [a-z0-9_-]{1,64}"});
  }
  if (book.title.empty()) {
    report.push_back({ViolationKind::EmptyTitle, {}, {}, "title is empty"});
  } else {
    check_utf8(report, {}, {}, "title", book.title);
  }
  if (book.age_range.min < 0 || book.age_range.min > book.age_range.max) {
    report.push_back({ViolationKind::InvalidAgeRange, {}, {},
                      "age range " + std::to_string(book.age_range.min) + ".." +
                          std::to_string(book.age_range.max) + " is not ordered"});
  }
  if (book.characters.empty()) {
    report.push_back({ViolationKind::NoCharacters, {}, {}, "book declares no characters"});
  }
  if (book.lines.empty()) {
    report.push_back({ViolationKind::NoLines, {}, {}, "book has no lines"});
  }

  std::set<CharacterId> declared;
  for (std::size_t i = 0; i < book.characters.size(); ++i) {
    const auto& c = book.characters[i];
    if (!is_valid_identifier(c.id.value)) {
      report.push_back({ViolationKind::InvalidCharacterId, {}, i,
                        "character id '" + c.id.value + "' does not match [a-z0-9_-]{1,64}"});
    }
    if (!declared.insert(c.id).second) {
      report.push_back({ViolationKind::DuplicateCharacter, {}, i,
                        "character id '" + c.id.value + "' is declared more than once"});
    }
    const auto name_len = utf8_length(c.display_name);
    if (name_len == 0 || name_len > kMaxDisplayNameChars) {
      report.push_back({ViolationKind::InvalidDisplayName, {}, i,
                        "display name must be 1-128 characters, got " + std::to_string(name_len)});
    } else {
      check_utf8(report, {}, i, "display name", c.display_name);
    }
  }

  for (std::size_t i = 0; i < book.lines.size(); ++i) {
    const auto& line = book.lines[i];
    if (line.index != i) {
      report.push_back({ViolationKind::NonContiguousIndex, i, {},
                        "expected index " + std::to_string(i) + ", found " +
                            std::to_string(line.index)});
    }
    if (line.page < 1) {
      report.push_back({ViolationKind::InvalidPage, i, {},
                        "page " + std::to_string(line.page) + " is not a positive number"});
    }
    if (i > 0 && line.page < book.lines[i - 1].page) {
      report.push_back({ViolationKind::DecreasingPage, i, {},
                        "page " + std::to_string(line.page) + " follows page " +
                            std::to_string(book.lines[i - 1].page)});
    }
    if (!declared.contains(line.character)) {
      report.push_back({ViolationKind::UndeclaredSpeaker, i, {},
                        "speaker '" + line.character.value + "' is not declared"});
    }
    const auto len = utf8_length(line.text);
    if (line.text.empty()) {
      report.push_back({ViolationKind::EmptyLineText, i, {}, "line text is empty"});
    } else if (len > kMaxLineChars) {
      report.push_back({ViolationKind::LineTooLong, i, {},
                        "line has " + std::to_string(len) + " characters, limit is " +
                            std::to_string(kMaxLineChars)});
    } else {
      check_utf8(report, i, {}, "line text", line.text);
    }
  }
  return report;
}

std::vector<Line> lines_for(const BookScript& book, const CharacterId& character) {
  if (book.find_character(character) == nullptr) throw UnknownCharacter(character);
  std::vector<Line> out;
  std::copy_if(book.lines.begin(), book.lines.end(), std::back_inserter(out),
               [&](const Line& l) { return l.character == character; });
  return out;
}

}  // namespace storycast
