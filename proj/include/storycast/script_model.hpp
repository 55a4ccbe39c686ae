// Book scripts: characters, readers and dialogue lines.
//
// All types here are plain values. Structural checks live in validate_book()
// and report violations as data; nothing in this header throws on
// construction except VoiceId, whose range is closed.

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace storycast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  /// Stable machine-readable name, e.g. "UnknownCharacter".
  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline constexpr std::size_t kMaxLineChars = 2000;
inline constexpr std::size_t kMaxDisplayNameChars = 128;
inline constexpr std::size_t kMaxIdChars = 64;

/// Number of Unicode code points in a UTF-8 string. Continuation bytes are
/// not counted; malformed input is counted leniently.
std::size_t utf8_length(std::string_view text) noexcept;

/// True when `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text) noexcept;

/// Matches `[a-z0-9_-]{1,64}`.
bool is_valid_identifier(std::string_view id) noexcept;

struct CharacterId {
  std::string value;

  CharacterId() = default;
  explicit CharacterId(std::string v) : value(std::move(v)) {}

  auto operator<=>(const CharacterId&) const = default;
};

struct Character {
  CharacterId id;
  std::string display_name;
  std::optional<std::string> portrait;

  bool operator==(const Character&) const = default;
};

inline constexpr int kVoiceCount = 6;

class UnknownVoice : public Error {
 public:
  explicit UnknownVoice(std::int64_t value)
      : Error("UnknownVoice", "unknown voice " + std::to_string(value) + " (expected 1.." +
                                  std::to_string(kVoiceCount) + ")") {}
};

/// One of the six synthetic voices. Always holds a value in 1..6.
class VoiceId {
 public:
  explicit VoiceId(std::int64_t value) : value_(static_cast<int>(value)) {
    if (value < 1 || value > kVoiceCount) throw UnknownVoice(value);
  }

  [[nodiscard]] int value() const noexcept { return value_; }

  auto operator<=>(const VoiceId&) const = default;

 private:
  int value_;
};

struct AgentVoice {
  VoiceId voice;
  bool operator==(const AgentVoice&) const = default;
};
struct HumanAdult {
  bool operator==(const HumanAdult&) const = default;
};
struct HumanChild {
  bool operator==(const HumanChild&) const = default;
};

using Reader = std::variant<AgentVoice, HumanAdult, HumanChild>;
using HumanReader = std::variant<HumanAdult, HumanChild>;

inline bool is_agent(const Reader& r) noexcept { return std::holds_alternative<AgentVoice>(r); }

/// "agent", "adult" or "child".
std::string_view reader_kind(const Reader& r) noexcept;

/// Human-readable badge: "Mate 3", "Adult", "Child".
std::string reader_label(const Reader& r);

struct Line {
  std::size_t index = 0;
  int page = 1;
  CharacterId character;
  std::string text;

  bool operator==(const Line&) const = default;
};

struct AgeRange {
  int min = 0;
  int max = 0;
  bool operator==(const AgeRange&) const = default;
};

struct BookScript {
  std::string id;
  std::string title;
  AgeRange age_range;
  std::vector<Character> characters;
  std::vector<Line> lines;

  bool operator==(const BookScript&) const = default;

  [[nodiscard]] const Character* find_character(const CharacterId& id) const noexcept;
};

enum class ViolationKind {
  InvalidBookId,
  EmptyTitle,
  InvalidAgeRange,
  NoCharacters,
  NoLines,
  InvalidCharacterId,
  DuplicateCharacter,
  InvalidDisplayName,
  NonContiguousIndex,
  InvalidPage,
  DecreasingPage,
  UndeclaredSpeaker,
  EmptyLineText,
  LineTooLong,
  InvalidUtf8,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  /// Position in `lines`, when the violation concerns a line.
  std::optional<std::size_t> line;
  /// Position in `characters`, when the violation concerns a character.
  std::optional<std::size_t> character;
  std::string message;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

/// One line per violation: "<Kind> at line 3: message".
std::string describe(const ValidationReport& report);

ValidationReport validate_book(const BookScript& book);

class UnknownCharacter : public Error {
 public:
  explicit UnknownCharacter(const CharacterId& id)
      : Error("UnknownCharacter", "character '" + id.value + "' is not declared in the book") {}
};

/// Lines spoken by `character`, in book order. Throws UnknownCharacter.
std::vector<Line> lines_for(const BookScript& book, const CharacterId& character);

}  // namespace storycast
