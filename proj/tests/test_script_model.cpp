#include <doctest.h>

#include <algorithm>
#include <set>

#include "storycast/script_model.hpp"
#include "support/test_support.hpp"

using namespace storycast;
using storycast::testing::make_book;

namespace {

std::size_t count_kind(const ValidationReport& r, ViolationKind k) {
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [k](const Violation& v) { return v.kind == k; }));
}

}  // namespace

TEST_CASE("minimal book is valid") {
  const auto book = make_book({"narrator"}, {"narrator"});
  CHECK(validate_book(book).empty());
}

TEST_CASE("undeclared speaker is reported at its line") {
  auto book = make_book({"narrator", "narrator", "narrator", "clara"}, {"narrator"});
  const auto report = validate_book(book);

  // Oracle: scan the lines against the declared set.
  std::set<std::string> declared;
  for (const auto& c : book.characters) declared.insert(c.id.value);
  std::vector<std::size_t> expected;
  for (const auto& l : book.lines) {
    if (!declared.contains(l.character.value)) expected.push_back(l.index);
  }
  REQUIRE(expected == std::vector<std::size_t>{3});

  REQUIRE(report.size() == 1);
  CHECK(report[0].kind == ViolationKind::UndeclaredSpeaker);
  CHECK(report[0].line == 3);
}

TEST_CASE("line indices must be contiguous") {
  auto book = make_book({"narrator", "narrator"}, {"narrator"});
  book.lines[1].index = 2;
  const auto report = validate_book(book);
  CHECK(count_kind(report, ViolationKind::NonContiguousIndex) == 1);
  CHECK(report[0].line == 1);
}

TEST_CASE("structural violations") {
  SUBCASE("empty book") {
    BookScript book{"b", "T", {3, 6}, {}, {}};
    const auto r = validate_book(book);
    CHECK(count_kind(r, ViolationKind::NoCharacters) == 1);
    CHECK(count_kind(r, ViolationKind::NoLines) == 1);
  }
  SUBCASE("age range reversed") {
    auto book = make_book({"a"}, {"a"});
    book.age_range = {6, 3};
    CHECK(count_kind(validate_book(book), ViolationKind::InvalidAgeRange) == 1);
  }
  SUBCASE("duplicate character") {
    auto book = make_book({"a"}, {"a", "a"});
    const auto r = validate_book(book);
    REQUIRE(count_kind(r, ViolationKind::DuplicateCharacter) == 1);
    CHECK(r[0].character == 1);
  }
  SUBCASE("bad identifiers") {
    auto book = make_book({"Narrator"}, {"Narrator"});
    book.id = "Has Space";
    const auto r = validate_book(book);
    CHECK(count_kind(r, ViolationKind::InvalidBookId) == 1);
    CHECK(count_kind(r, ViolationKind::InvalidCharacterId) == 1);
  }
  SUBCASE("display name length") {
    auto book = make_book({"a"}, {"a"});
    book.characters[0].display_name = "";
    CHECK(count_kind(validate_book(book), ViolationKind::InvalidDisplayName) == 1);
    book.characters[0].display_name = std::string(128, 'x');
    CHECK(validate_book(book).empty());
    book.characters[0].display_name = std::string(129, 'x');
    CHECK(count_kind(validate_book(book), ViolationKind::InvalidDisplayName) == 1);
  }
  SUBCASE("line text limits count characters, not bytes") {
    auto book = make_book({"a"}, {"a"});
    book.lines[0].text = "";
    CHECK(count_kind(validate_book(book), ViolationKind::EmptyLineText) == 1);
    std::string stars;
    for (int i = 0; i < 2000; ++i) stars += "\xE2\x98\x85";  // 3 bytes each
    book.lines[0].text = stars;
    CHECK(validate_book(book).empty());
    book.lines[0].text += "x";
    CHECK(count_kind(validate_book(book), ViolationKind::LineTooLong) == 1);
  }
  SUBCASE("pages") {
    auto book = make_book({"a", "a", "a"}, {"a"});
    book.lines[0].page = 2;
    book.lines[1].page = 1;
    book.lines[2].page = 0;
    const auto r = validate_book(book);
    // 2 -> 1 -> 0 drops twice; page 0 is also out of range.
    CHECK(count_kind(r, ViolationKind::DecreasingPage) == 2);
    CHECK(count_kind(r, ViolationKind::InvalidPage) == 1);
  }
  SUBCASE("malformed utf-8") {
    auto book = make_book({"a"}, {"a"});
    book.lines[0].text = "bad \xC3";
    CHECK(count_kind(validate_book(book), ViolationKind::InvalidUtf8) == 1);
    book.lines[0].text = "overlong \xC0\xAF";
    CHECK(count_kind(validate_book(book), ViolationKind::InvalidUtf8) == 1);
  }
}

TEST_CASE("utf8 helpers") {
  CHECK(utf8_length("Hello, I am Mate 1") == 18);
  CHECK(utf8_length("caf\xC3\xA9") == 4);
  CHECK(utf8_length("\xF0\x9F\x8E\x82") == 1);
  CHECK(is_valid_utf8("caf\xC3\xA9 \xF0\x9F\x8E\x82"));
  CHECK_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
  CHECK_FALSE(is_valid_utf8("\xF4\x90\x80\x80"));  // > U+10FFFF
  CHECK(is_valid_identifier("char_1-x"));
  CHECK_FALSE(is_valid_identifier(""));
  CHECK_FALSE(is_valid_identifier(std::string(65, 'a')));
}

TEST_CASE("lines_for") {
  const auto book = make_book({"narrator", "clara", "narrator"}, {"narrator", "clara", "milo"});

  SUBCASE("filters in index order") {
    std::vector<Line> expected;
    for (const auto& l : book.lines) {
      if (l.character.value == "narrator") expected.push_back(l);
    }
    const auto got = lines_for(book, CharacterId("narrator"));
    CHECK(got == expected);
    REQUIRE(got.size() == 2);
    CHECK(got[0].index == 0);
    CHECK(got[1].index == 2);
  }
  SUBCASE("silent character") { CHECK(lines_for(book, CharacterId("milo")).empty()); }
  SUBCASE("unknown character") {
    CHECK_THROWS_AS(lines_for(book, CharacterId("ghost")), UnknownCharacter);
  }
}

TEST_CASE("property: lines_for partitions the book") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto book = storycast::testing::random_book(rng);
    REQUIRE(validate_book(book).empty());
    std::vector<Line> all;
    for (const auto& c : book.characters) {
      auto part = lines_for(book, c.id);
      all.insert(all.end(), part.begin(), part.end());
    }
    std::sort(all.begin(), all.end(), [](const Line& a, const Line& b) { return a.index < b.index; });
    CHECK(all == book.lines);
    CHECK(validate_book(book) == validate_book(book));
  }
}

TEST_CASE("property: single mutations are always detected") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    auto book = storycast::testing::random_book(rng, {1, 6, 2, 20});
    const auto i = rng() % book.lines.size();
    ViolationKind expected{};
    switch (rng() % 6) {
      case 0:
        book.lines[i].character = CharacterId("undeclared");
        expected = ViolationKind::UndeclaredSpeaker;
        break;
      case 1:
        book.lines[i].index += 1 + rng() % 3;
        expected = ViolationKind::NonContiguousIndex;
        break;
      case 2:
        book.lines[i].text.clear();
        expected = ViolationKind::EmptyLineText;
        break;
      case 3:
        book.characters.push_back(book.characters.front());
        expected = ViolationKind::DuplicateCharacter;
        break;
      case 4:
        book.age_range.min = book.age_range.max + 1;
        expected = ViolationKind::InvalidAgeRange;
        break;
      default:
        book.lines.back().page = 0;
        expected = ViolationKind::InvalidPage;
        break;
    }
    CHECK(count_kind(validate_book(book), expected) >= 1);
  }
}
