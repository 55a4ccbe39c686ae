#include "storycast/casting.hpp"

#include <algorithm>
#include <set>

namespace storycast {

namespace {

std::vector<VoiceProfile> make_profiles() {
  // Backend voice names are cloud-TTS "Standard" voices; pitch is in
  // semitones, rate is a multiplier. Mock synthesis ignores both.
  struct Params {
    const char* voice_name;
    const char* pitch;
    const char* rate;
  };
  static constexpr Params params[kVoiceCount] = {
      {"en-US-Standard-A", "0.0", "1.00"},  {"en-US-Standard-C", "2.0", "0.95"},
      {"en-US-Standard-D", "-2.0", "0.95"}, {"en-US-Standard-E", "4.0", "1.05"},
      {"en-US-Standard-I", "-4.0", "0.90"}, {"en-US-Standard-H", "1.0", "1.00"},
  };
  std::vector<VoiceProfile> out;
  for (int i = 1; i <= kVoiceCount; ++i) {
    const auto& p = params[i - 1];
    out.push_back(VoiceProfile{
        VoiceId(i),
        "Mate " + std::to_string(i),
        {{"voice_name", p.voice_name}, {"pitch", p.pitch}, {"speaking_rate", p.rate}},
    });
  }
  return out;
}

}  // namespace

const std::vector<VoiceProfile>& voice_profiles() {
  static const std::vector<VoiceProfile> profiles = make_profiles();
  return profiles;
}

const VoiceProfile& voice_profile(VoiceId id) {
  return voice_profiles()[static_cast<std::size_t>(id.value() - 1)];
}

SynthesisRequest preview_greeting(VoiceId voice) {
  return SynthesisRequest{voice, "Hello, I am Mate " + std::to_string(voice.value())};
}

const Reader* CastSheet::reader_for(const CharacterId& id) const noexcept {
  auto it = entries.find(id);
  return it == entries.end() ? nullptr : &it->second;
}

CastSheet empty_cast(const BookScript& book, bool allow_voice_reuse) {
  return CastSheet{book.id, {}, allow_voice_reuse};
}

CastSheet assign(const BookScript& book, const CastSheet& cast, const CharacterId& character,
                 const Reader& reader) {
  if (cast.book_id != book.id) throw BookMismatch(cast.book_id, book.id);
  if (book.find_character(character) == nullptr) throw UnknownCharacter(character);

  if (const auto* agent = std::get_if<AgentVoice>(&reader); agent && !cast.allow_voice_reuse) {
    for (const auto& [holder, existing] : cast.entries) {
      if (holder != character && existing == reader) throw VoiceInUse(agent->voice, holder);
    }
  }
  CastSheet next = cast;
  next.entries.insert_or_assign(character, reader);
  return next;
}

CastSheet unassign(const CastSheet& cast, const CharacterId& character) {
  CastSheet next = cast;
  next.entries.erase(character);
  return next;
}

CastReport validate_cast(const BookScript& book, const CastSheet& cast) {
  if (cast.book_id != book.id) throw BookMismatch(cast.book_id, book.id);

  std::set<CharacterId> speaking;
  for (const auto& line : book.lines) speaking.insert(line.character);

  CastReport report;
  for (const auto& c : book.characters) {
    if (speaking.contains(c.id) && !cast.entries.contains(c.id)) report.uncast.push_back(c.id);
  }
  report.complete = report.uncast.empty();
  return report;
}

}  // namespace storycast
