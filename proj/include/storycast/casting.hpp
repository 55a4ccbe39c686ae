// The six agent voices and the character -> reader cast sheet.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "storycast/script_model.hpp"

namespace storycast {

/// Fixed output format of every synthesized clip.
inline constexpr std::string_view kAudioFormat = "wav/pcm16/22050Hz/mono";

/// One of the "Mate" voices. `synthesis_params` are backend key-values
/// (voice name, pitch, speaking rate) passed through untouched.
struct VoiceProfile {
  VoiceId id;
  std::string display_name;
  std::map<std::string, std::string> synthesis_params;

  bool operator==(const VoiceProfile&) const = default;
};

/// All six profiles, ordered by id.
const std::vector<VoiceProfile>& voice_profiles();
const VoiceProfile& voice_profile(VoiceId id);

struct SynthesisRequest {
  VoiceId voice;
  std::string text;
  std::string format{kAudioFormat};

  bool operator==(const SynthesisRequest&) const = default;
};

/// "Hello, I am Mate X" bound to voice X.
SynthesisRequest preview_greeting(VoiceId voice);

struct CastSheet {
  std::string book_id;
  std::map<CharacterId, Reader> entries;
  /// When false, an AgentVoice may be cast to at most one character.
  bool allow_voice_reuse = false;

  bool operator==(const CastSheet&) const = default;

  [[nodiscard]] const Reader* reader_for(const CharacterId& id) const noexcept;
};

CastSheet empty_cast(const BookScript& book, bool allow_voice_reuse = false);

class VoiceInUse : public Error {
 public:
  VoiceInUse(VoiceId voice, const CharacterId& holder)
      : Error("VoiceInUse", "Mate " + std::to_string(voice.value()) +
                                " is already cast as '" + holder.value + "'") {}
};

class BookMismatch : public Error {
 public:
  BookMismatch(const std::string& cast_book, const std::string& book)
      : Error("BookMismatch",
              "cast sheet belongs to book '" + cast_book + "', not '" + book + "'") {}
};

/// Returns `cast` with `character` mapped to `reader`, replacing any previous
/// entry. Throws BookMismatch, UnknownCharacter or VoiceInUse.
CastSheet assign(const BookScript& book, const CastSheet& cast, const CharacterId& character,
                 const Reader& reader);

/// Returns `cast` without an entry for `character`. No-op when absent.
CastSheet unassign(const CastSheet& cast, const CharacterId& character);

struct CastReport {
  bool complete = false;
  /// Speaking characters without an entry, in declaration order.
  std::vector<CharacterId> uncast;

  bool operator==(const CastReport&) const = default;
};

/// Complete iff every character that speaks at least one line is cast.
/// Throws BookMismatch.
CastReport validate_cast(const BookScript& book, const CastSheet& cast);

}  // namespace storycast
