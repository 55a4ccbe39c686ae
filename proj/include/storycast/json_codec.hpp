// JSON encodings shared by session files and the HTTP API.
//
//   Reader       {"kind": "agent", "voice": 2} | {"kind": "adult"} | {"kind": "child"}
//   SessionPhase {"kind": "Idle", "cursor": 1}; AgentSpeaking adds "request_id"
//   TurnDirective{"kind": "PlayAgent", "line_index", "voice", "text", "request_id"}
//                {"kind": "AwaitHuman", "line_index", "reader"} | {"kind": "SessionComplete"}
//
// Decoders throw SchemaError with a JSON path on malformed input.

#pragma once

#include <json.hpp>

#include "storycast/casting.hpp"
#include "storycast/session_engine.hpp"

namespace storycast::codec {

using nlohmann::json;

json to_json(const Reader& reader);
Reader reader_from_json(const json& j, const std::string& path = "");

json to_json(const CastSheet& cast);
CastSheet cast_from_json(const json& j, const std::string& path = "");

/// Character -> reader object, as sent by PUT /sessions/{id}/cast.
json entries_to_json(const std::map<CharacterId, Reader>& entries);
std::map<CharacterId, Reader> entries_from_json(const json& j, const std::string& path = "");

json to_json(const CastReport& report);

json to_json(const SessionPhase& phase);
SessionPhase phase_from_json(const json& j, const std::string& path = "");

json to_json(const SessionEvent& event);
SessionEvent event_from_json(const json& j, const std::string& path = "");

json to_json(const TurnDirective& directive);
json to_json(ControlSet controls);
json to_json(const VoiceProfile& voice);
json to_json(const LineView& line);
json to_json(const SessionView& view);

}  // namespace storycast::codec
