#include <doctest.h>

#include <set>

#include <json.hpp>

#include "storycast/script_parser.hpp"
#include "support/test_support.hpp"

using namespace storycast;
namespace st = storycast::testing;

namespace {

const char* kMinimal = R"({
  "format_version": 1, "id": "tiny", "title": "Tiny", "age_min": 3, "age_max": 6,
  "characters": [{"id": "narrator", "name": "Narrator"}],
  "pages": [{"page": 1, "lines": [{"character": "narrator", "text": "The end."}]}]
})";

template <class E>
E expect_error(const std::string& doc) {
  try {
    parse_book(BookDocument{doc});
  } catch (const E& e) {
    return e;
  }
  FAIL("expected " << typeid(E).name());
  throw;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal document") {
  const auto book = parse_book(BookDocument{kMinimal});
  CHECK(book.id == "tiny");
  CHECK(book.age_range == AgeRange{3, 6});
  REQUIRE(book.lines.size() == 1);
  CHECK(book.lines[0] == Line{0, 1, CharacterId("narrator"), "The end."});
  CHECK_FALSE(book.characters[0].portrait.has_value());
}

TEST_CASE("duplicate character id is a schema error at the second entry") {
  const std::string doc = R"({
    "format_version": 1, "id": "dup", "title": "Dup", "age_min": 3, "age_max": 6,
    "characters": [{"id": "clara", "name": "Clara"}, {"id": "clara", "name": "Other"}],
    "pages": [{"page": 1, "lines": [{"character": "clara", "text": "Hi"}]}]
  })";
  // Oracle: first repeated id in declaration order.
  const auto parsed = nlohmann::json::parse(doc);
  std::set<std::string> seen;
  std::size_t dup_at = 0;
  for (std::size_t i = 0; i < parsed["characters"].size(); ++i) {
    if (!seen.insert(parsed["characters"][i]["id"].get<std::string>()).second) {
      dup_at = i;
      break;
    }
  }
  const auto e = expect_error<SchemaError>(doc);
  CHECK(e.path() == "characters[" + std::to_string(dup_at) + "].id");
  CHECK(e.path() == "characters[1].id");
}

TEST_CASE("sample book opens with the Narrator, then Clara") {
  const auto book = st::sample_book();
  REQUIRE(book.lines.size() >= 2);
  CHECK(book.lines[0].character == CharacterId("narrator"));
  CHECK(book.find_character(book.lines[0].character)->display_name == "Narrator");
  CHECK(book.lines[1].character == CharacterId("clara"));
  CHECK(book.find_character(book.lines[1].character)->display_name == "Clara");
}

TEST_CASE("schema errors carry a path") {
  SUBCASE("unknown field") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("age_max": 6,)", R"("age_max": 6, "extra": 1,)"))
              .path() == "extra");
  }
  SUBCASE("unknown nested field") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("name": "Narrator")",
                                            R"("name": "Narrator", "voice": 1)"))
              .path() == "characters[0].voice");
  }
  SUBCASE("missing field") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("title": "Tiny",)", "")).path() == "title");
  }
  SUBCASE("wrong type") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("age_min": 3)", R"("age_min": "3")"))
              .path() == "age_min");
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("age_min": 3)", R"("age_min": 3.5)"))
              .path() == "age_min");
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("text": "The end.")", R"("text": 7)"))
              .path() == "pages[0].lines[0].text");
  }
  SUBCASE("unsupported version") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("format_version": 1)", R"("format_version": 2)"))
              .path() == "format_version");
  }
  SUBCASE("page numbers start at 1") {
    CHECK(expect_error<SchemaError>(replace(kMinimal, R"("page": 1)", R"("page": 0)")).path() ==
          "pages[0].page");
  }
  SUBCASE("empty page") {
    const auto doc = replace(kMinimal, R"(]}]
})", R"(]}, {"page": 2, "lines": []}]
})");
    CHECK(expect_error<SchemaError>(doc).path() == "pages[1].lines");
  }
  SUBCASE("duplicate key") {
    CHECK_THROWS_AS(parse_book(BookDocument{replace(kMinimal, R"("title": "Tiny",)",
                                                    R"("title": "Tiny", "title": "Again",)")}),
                    SchemaError);
  }
  SUBCASE("root must be an object") { CHECK(expect_error<SchemaError>("[]").path().empty()); }
}

TEST_CASE("syntax errors carry a byte offset") {
  const std::string doc = R"({"format_version": 1,, "id": "x"})";
  const auto e = expect_error<SyntaxError>(doc);
  CHECK(e.byte_offset() == doc.find(",,") + 1);
  CHECK_THROWS_AS(parse_book(BookDocument{"{\"id\": \"caf\xC3\"}"}), SyntaxError);
  CHECK_THROWS_AS(parse_book(BookDocument{""}), SyntaxError);
}

TEST_CASE("structurally valid JSON that breaks book invariants") {
  const auto doc = replace(kMinimal, R"("character": "narrator")", R"("character": "clara")");
  const auto e = expect_error<ValidationError>(doc);
  REQUIRE(e.report().size() == 1);
  CHECK(e.report()[0].kind == ViolationKind::UndeclaredSpeaker);
}

TEST_CASE("serialize") {
  const auto book = parse_book(BookDocument{kMinimal});

  SUBCASE("round trip") { CHECK(parse_book(serialize_book(book)) == book); }

  SUBCASE("canonical layout") {
    const auto bytes = serialize_book(book).bytes;
    CHECK(bytes.back() == '\n');
    CHECK(bytes.find('\r') == std::string::npos);
    CHECK(bytes.find(" \n") == std::string::npos);
    CHECK(bytes.rfind("{\n  \"format_version\": 1,\n  \"id\": \"tiny\",", 0) == 0);
  }

  SUBCASE("equal books give identical bytes") {
    std::mt19937_64 a(5), b(5);
    for (int i = 0; i < 50; ++i) {
      const auto x = st::random_book(a);
      const auto y = st::random_book(b);
      REQUIRE(x == y);
      CHECK(serialize_book(x) == serialize_book(y));
    }
  }

  SUBCASE("invalid book is refused") {
    auto bad = book;
    bad.lines[0].character = CharacterId("clara");
    CHECK_THROWS_AS(serialize_book(bad), InvalidBook);
  }

  SUBCASE("non-consecutive lines on the same page stay in order") {
    auto b = st::make_book({"a", "a", "a"}, {"a"});
    b.lines[0].page = 1;
    b.lines[1].page = 1;
    b.lines[2].page = 4;
    const auto again = parse_book(serialize_book(b));
    CHECK(again == b);
  }
}

TEST_CASE("golden corpora") {
  const auto dir = st::source_dir() / "tests/golden";

  SUBCASE("valid document canonicalizes to the golden bytes") {
    const auto book = parse_book(BookDocument{st::slurp(dir / "valid.book.json")});
    CHECK(serialize_book(book).bytes == st::slurp(dir / "valid.canonical.book.json"));
    CHECK(book.lines.size() == 5);
    CHECK(book.lines[4].page == 3);
  }
  SUBCASE("schema error message") {
    const auto e = expect_error<SchemaError>(st::slurp(dir / "schema_error.book.json"));
    CHECK(std::string(e.what()) + "\n" == st::slurp(dir / "schema_error.expected.txt"));
  }
  SUBCASE("validation error message") {
    const auto e = expect_error<ValidationError>(st::slurp(dir / "validation_error.book.json"));
    CHECK(std::string(e.what()) + "\n" == st::slurp(dir / "validation_error.expected.txt"));
  }
  SUBCASE("shipped sample is stored canonically") {
    const auto bytes = st::slurp(st::source_dir() / "data/books/sample_patterns.book.json");
    CHECK(serialize_book(parse_book(BookDocument{bytes})).bytes == bytes);
  }
}

TEST_CASE("property: round trip and canonical re-serialization") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto book = st::random_book(rng);
    const auto doc = serialize_book(book);
    const auto back = parse_book(doc);
    REQUIRE(back == book);
    CHECK(serialize_book(back) == doc);
  }
}
