#include <doctest.h>

#include <map>
#include <regex>

#include "storycast/casting.hpp"
#include "support/test_support.hpp"

using namespace storycast;
namespace st = storycast::testing;

TEST_CASE("voice profiles") {
  const auto& voices = voice_profiles();
  REQUIRE(voices.size() == 6);
  for (int i = 1; i <= 6; ++i) {
    CHECK(voices[static_cast<std::size_t>(i - 1)].id == VoiceId(i));
    CHECK(voices[static_cast<std::size_t>(i - 1)].display_name == "Mate " + std::to_string(i));
    CHECK(voice_profile(VoiceId(i)).synthesis_params.contains("voice_name"));
  }
}

TEST_CASE("preview greeting") {
  CHECK(preview_greeting(VoiceId(1)) ==
        SynthesisRequest{VoiceId(1), "Hello, I am Mate 1", "wav/pcm16/22050Hz/mono"});
  CHECK(preview_greeting(VoiceId(6)).text == "Hello, I am Mate 6");
  CHECK_THROWS_AS(preview_greeting(VoiceId(7)), UnknownVoice);
  CHECK_THROWS_AS(VoiceId(0), UnknownVoice);

  const std::regex shape(R"(Hello, I am Mate ([1-6]))");
  for (const auto& v : voice_profiles()) {
    const auto req = preview_greeting(v.id);
    std::smatch m;
    REQUIRE(std::regex_match(req.text, m, shape));
    CHECK(std::stoi(m[1]) == v.id.value());
    CHECK(req.voice == v.id);
  }
}

TEST_CASE("assigning the walkthrough cast") {
  const auto book = st::sample_book();
  auto cast = empty_cast(book);
  cast = assign(book, cast, CharacterId("narrator"), AgentVoice{VoiceId(1)});
  cast = assign(book, cast, CharacterId("clara"), AgentVoice{VoiceId(2)});
  REQUIRE(cast.entries.size() == 2);
  CHECK(*cast.reader_for(CharacterId("narrator")) == Reader{AgentVoice{VoiceId(1)}});
  CHECK(*cast.reader_for(CharacterId("clara")) == Reader{AgentVoice{VoiceId(2)}});
  CHECK(reader_label(*cast.reader_for(CharacterId("clara"))) == "Mate 2");
  CHECK(cast.reader_for(CharacterId("milo")) == nullptr);
}

TEST_CASE("assign rules") {
  const auto book = st::make_book({"a", "b", "c"}, {"a", "b", "c"});
  const auto base = assign(book, empty_cast(book), CharacterId("a"), AgentVoice{VoiceId(1)});

  SUBCASE("reassigning replaces the entry") {
    const auto next = assign(book, base, CharacterId("a"), HumanChild{});
    CHECK(next.entries.size() == 1);
    CHECK(*next.reader_for(CharacterId("a")) == Reader{HumanChild{}});
    // input untouched
    CHECK(*base.reader_for(CharacterId("a")) == Reader{AgentVoice{VoiceId(1)}});
  }
  SUBCASE("same character may keep its own voice") {
    CHECK_NOTHROW(assign(book, base, CharacterId("a"), AgentVoice{VoiceId(1)}));
  }
  SUBCASE("voice held by another character") {
    CHECK_THROWS_AS(assign(book, base, CharacterId("b"), AgentVoice{VoiceId(1)}), VoiceInUse);
    auto relaxed = base;
    relaxed.allow_voice_reuse = true;
    CHECK(assign(book, relaxed, CharacterId("b"), AgentVoice{VoiceId(1)}).entries.size() == 2);
  }
  SUBCASE("humans can be cast many times") {
    auto c = assign(book, base, CharacterId("b"), HumanAdult{});
    CHECK_NOTHROW(assign(book, c, CharacterId("c"), HumanAdult{}));
  }
  SUBCASE("unknown character") {
    CHECK_THROWS_AS(assign(book, base, CharacterId("zed"), HumanAdult{}), UnknownCharacter);
  }
  SUBCASE("cast of another book") {
    auto other = base;
    other.book_id = "other";
    CHECK_THROWS_AS(assign(book, other, CharacterId("a"), HumanAdult{}), BookMismatch);
    CHECK_THROWS_AS(validate_cast(book, other), BookMismatch);
  }
  SUBCASE("unassign") {
    const auto gone = unassign(base, CharacterId("a"));
    CHECK(gone.entries.empty());
    CHECK(unassign(gone, CharacterId("a")) == gone);
  }
}

TEST_CASE("validate_cast") {
  const auto book = st::make_book({"a", "b", "a"}, {"a", "b", "silent"});
  auto cast = empty_cast(book);
  auto r = validate_cast(book, cast);
  CHECK_FALSE(r.complete);
  CHECK(r.uncast == std::vector<CharacterId>{CharacterId("a"), CharacterId("b")});

  cast = assign(book, cast, CharacterId("a"), AgentVoice{VoiceId(4)});
  r = validate_cast(book, cast);
  CHECK(r.uncast == std::vector<CharacterId>{CharacterId("b")});

  cast = assign(book, cast, CharacterId("b"), HumanAdult{});
  r = validate_cast(book, cast);
  CHECK(r.complete);
  CHECK(r.uncast.empty());
}

TEST_CASE("property: random assign/unassign sequences against a plain map") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto book = st::random_book(rng, {1, 6, 1, 20});
    const bool reuse = rng() % 2;
    auto cast = empty_cast(book, reuse);
    std::map<std::string, Reader> model;

    for (int step = 0; step < 40; ++step) {
      const auto& ch = book.characters[rng() % book.characters.size()].id;
      if (rng() % 4 == 0) {
        cast = unassign(cast, ch);
        model.erase(ch.value);
        continue;
      }
      Reader r = HumanAdult{};
      switch (rng() % 3) {
        case 0: r = AgentVoice{VoiceId(static_cast<int>(1 + rng() % 6))}; break;
        case 1: r = HumanChild{}; break;
        default: break;
      }
      bool clash = false;
      if (is_agent(r) && !reuse) {
        for (const auto& [holder, existing] : model) clash |= holder != ch.value && existing == r;
      }
      if (clash) {
        CHECK_THROWS_AS(assign(book, cast, ch, r), VoiceInUse);
      } else {
        cast = assign(book, cast, ch, r);
        model.insert_or_assign(ch.value, r);
      }
    }

    REQUIRE(cast.entries.size() == model.size());
    for (const auto& [id, r] : cast.entries) CHECK(model.at(id.value) == r);

    std::vector<CharacterId> uncast;
    for (const auto& c : book.characters) {
      const bool speaks = std::any_of(book.lines.begin(), book.lines.end(),
                                      [&](const Line& l) { return l.character == c.id; });
      if (speaks && !model.contains(c.id.value)) uncast.push_back(c.id);
    }
    const auto report = validate_cast(book, cast);
    CHECK(report.uncast == uncast);
    CHECK(report.complete == uncast.empty());
  }
}
