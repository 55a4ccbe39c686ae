#include "storycast/json_codec.hpp"

#include "storycast/script_parser.hpp"

namespace storycast::codec {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string at(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

const json& field(const json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(at(path, key), "missing required field");
  return *it;
}

std::string string_field(const json& j, std::string_view key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_string()) throw SchemaError(at(path, key), "expected string");
  return v.get<std::string>();
}

std::uint64_t uint_field(const json& j, std::string_view key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_number_unsigned()) throw SchemaError(at(path, key), "expected non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<std::uint64_t> optional_uint(const json& j, std::string_view key,
                                           const std::string& path) {
  if (!j.contains(key) || j.at(std::string(key)).is_null()) return std::nullopt;
  return uint_field(j, key, path);
}

}  // namespace

json to_json(const Reader& reader) {
  json j = {{"kind", reader_kind(reader)}};
  if (const auto* agent = std::get_if<AgentVoice>(&reader)) j["voice"] = agent->voice.value();
  return j;
}

Reader reader_from_json(const json& j, const std::string& path) {
  const auto kind = string_field(j, "kind", path);
  if (kind == "agent") {
    const auto& v = field(j, "voice", path);
    if (!v.is_number_integer()) throw SchemaError(at(path, "voice"), "expected integer");
    try {
      return AgentVoice{VoiceId(v.get<std::int64_t>())};
    } catch (const UnknownVoice& e) {
      throw SchemaError(at(path, "voice"), e.what());
    }
  }
  if (kind == "adult") return HumanAdult{};
  if (kind == "child") return HumanChild{};
  throw SchemaError(at(path, "kind"), "unknown reader kind '" + kind + "'");
}

json entries_to_json(const std::map<CharacterId, Reader>& entries) {
  json j = json::object();
  for (const auto& [id, reader] : entries) j[id.value] = to_json(reader);
  return j;
}

std::map<CharacterId, Reader> entries_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected object of character -> reader");
  std::map<CharacterId, Reader> out;
  for (const auto& [key, value] : j.items()) {
    out.emplace(CharacterId(key), reader_from_json(value, at(path, key)));
  }
  return out;
}

json to_json(const CastSheet& cast) {
  return {{"book_id", cast.book_id},
          {"allow_voice_reuse", cast.allow_voice_reuse},
          {"entries", entries_to_json(cast.entries)}};
}

CastSheet cast_from_json(const json& j, const std::string& path) {
  CastSheet cast;
  cast.book_id = string_field(j, "book_id", path);
  const auto& reuse = field(j, "allow_voice_reuse", path);
  if (!reuse.is_boolean()) throw SchemaError(at(path, "allow_voice_reuse"), "expected boolean");
  cast.allow_voice_reuse = reuse.get<bool>();
  cast.entries = entries_from_json(field(j, "entries", path), at(path, "entries"));
  return cast;
}

json to_json(const CastReport& report) {
  json uncast = json::array();
  for (const auto& id : report.uncast) uncast.push_back(id.value);
  return {{"complete", report.complete}, {"uncast", std::move(uncast)}};
}

json to_json(const SessionPhase& phase) {
  json j = {{"kind", phase_name(phase)}};
  if (auto c = cursor_of(phase)) j["cursor"] = *c;
  if (const auto* s = std::get_if<phase::AgentSpeaking>(&phase)) j["request_id"] = s->request_id;
  return j;
}

SessionPhase phase_from_json(const json& j, const std::string& path) {
  const auto kind = string_field(j, "kind", path);
  if (kind == "NotStarted") return phase::NotStarted{};
  if (kind == "Completed") return phase::Completed{};
  const auto cursor = static_cast<std::size_t>(uint_field(j, "cursor", path));
  if (kind == "Idle") return phase::Idle{cursor};
  if (kind == "AwaitingHuman") return phase::AwaitingHuman{cursor};
  if (kind == "AgentSpeaking") return phase::AgentSpeaking{cursor, uint_field(j, "request_id", path)};
  throw SchemaError(at(path, "kind"), "unknown phase '" + kind + "'");
}

json to_json(const SessionEvent& event) {
  json j = {{"timestamp_us", event.timestamp_us}, {"event", to_string(event.kind)}};
  if (event.line) j["line"] = *event.line;
  if (event.request_id) j["request_id"] = *event.request_id;
  return j;
}

SessionEvent event_from_json(const json& j, const std::string& path) {
  SessionEvent e;
  const auto& ts = field(j, "timestamp_us", path);
  if (!ts.is_number_integer()) throw SchemaError(at(path, "timestamp_us"), "expected integer");
  e.timestamp_us = ts.get<std::int64_t>();
  const auto name = string_field(j, "event", path);
  auto kind = event_kind_from_string(name);
  if (!kind) throw SchemaError(at(path, "event"), "unknown event '" + name + "'");
  e.kind = *kind;
  if (auto line = optional_uint(j, "line", path)) e.line = static_cast<std::size_t>(*line);
  e.request_id = optional_uint(j, "request_id", path);
  return e;
}

json to_json(const TurnDirective& d) {
  return std::visit(
      overloaded{
          [](const directive::PlayAgent& p) {
            return json{{"kind", "PlayAgent"},
                        {"line_index", p.line_index},
                        {"voice", p.voice.value()},
                        {"text", p.text},
                        {"request_id", p.request_id}};
          },
          [](const directive::AwaitHuman& a) {
            const Reader reader = std::holds_alternative<HumanAdult>(a.reader) ? Reader{HumanAdult{}}
                                                                               : Reader{HumanChild{}};
            return json{{"kind", "AwaitHuman"},
                        {"line_index", a.line_index},
                        {"reader", to_json(reader)}};
          },
          [](const directive::SessionComplete&) { return json{{"kind", "SessionComplete"}}; },
      },
      d);
}

json to_json(ControlSet controls) {
  json j = json::array();
  for (auto c : controls.to_vector()) j.push_back(to_string(c));
  return j;
}

json to_json(const VoiceProfile& voice) {
  return {{"id", voice.id.value()},
          {"name", voice.display_name},
          {"preview_url", "/voices/" + std::to_string(voice.id.value()) + "/preview"},
          {"synthesis_params", voice.synthesis_params}};
}

json to_json(const LineView& line) {
  json j = {{"index", line.index},
            {"page", line.page},
            {"character", line.character.value},
            {"name", line.character_name},
            {"text", line.text}};
  j["portrait"] = line.portrait ? json(*line.portrait) : json(nullptr);
  if (line.reader) {
    j["reader"] = to_json(*line.reader);
    j["reader"]["label"] = reader_label(*line.reader);
  } else {
    j["reader"] = nullptr;
  }
  return j;
}

json to_json(const SessionView& view) {
  json lines = json::array();
  for (const auto& l : view.lines) lines.push_back(to_json(l));
  json highlight = nullptr;
  if (view.highlight) highlight = {{"line", *view.highlight}, {"color", "green"}};
  return {{"book_id", view.book_id}, {"title", view.title},       {"phase", to_json(view.phase)},
          {"highlight", highlight},  {"controls", to_json(view.controls)}, {"lines", std::move(lines)}};
}

}  // namespace storycast::codec
