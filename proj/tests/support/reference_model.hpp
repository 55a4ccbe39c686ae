// Second, independent description of the turn engine used as an oracle.
// Works on (kind, cursor) pairs and the cast's agent/human split only.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "storycast/session_engine.hpp"

namespace storycast::testing {

enum class Op { Advance, Back, Replay, Finish, PlaybackCurrent, PlaybackStale };

inline constexpr Op kAllOps[] = {Op::Advance, Op::Back, Op::Replay, Op::Finish,
                                 Op::PlaybackCurrent, Op::PlaybackStale};

struct ModelState {
  enum Kind { NotStarted, Idle, Speaking, Awaiting, Completed } kind = NotStarted;
  std::size_t cursor = 0;
  bool operator==(const ModelState&) const = default;
};

/// `agent[i]` says whether line i is voiced by an agent.
struct Model {
  std::vector<bool> agent;

  /// Next state, or nullopt when the op must be refused.
  [[nodiscard]] std::optional<ModelState> step(const ModelState& s, Op op) const {
    const auto n = agent.size();
    auto land = [&](std::size_t line) {
      if (line >= n) return ModelState{ModelState::Completed, 0};
      return ModelState{agent[line] ? ModelState::Speaking : ModelState::Awaiting, line};
    };
    switch (op) {
      case Op::Advance:
        if (s.kind == ModelState::NotStarted) return land(0);
        if (s.kind == ModelState::Idle) return land(s.cursor);
        if (s.kind == ModelState::Awaiting) return land(s.cursor + 1);
        return std::nullopt;
      case Op::Back:
        if (s.kind == ModelState::Idle && s.cursor > 0) return ModelState{ModelState::Idle, s.cursor - 1};
        if (s.kind == ModelState::Awaiting) {
          return ModelState{ModelState::Idle, s.cursor == 0 ? 0 : s.cursor - 1};
        }
        if (s.kind == ModelState::Completed) return ModelState{ModelState::Idle, n - 1};
        return std::nullopt;
      case Op::Replay:
        if (s.kind == ModelState::Idle || s.kind == ModelState::Awaiting) return land(s.cursor);
        return std::nullopt;
      case Op::Finish:
        if (s.kind == ModelState::Completed) return s;
        return std::nullopt;
      case Op::PlaybackCurrent:
        if (s.kind != ModelState::Speaking) return std::nullopt;
        if (s.cursor + 1 >= n) return ModelState{ModelState::Completed, 0};
        return ModelState{ModelState::Idle, s.cursor + 1};
      case Op::PlaybackStale:
        return std::nullopt;
    }
    return std::nullopt;
  }
};

inline ModelState model_state_of(const SessionPhase& p) {
  if (std::holds_alternative<phase::NotStarted>(p)) return {ModelState::NotStarted, 0};
  if (const auto* s = std::get_if<phase::Idle>(&p)) return {ModelState::Idle, s->cursor};
  if (const auto* s = std::get_if<phase::AgentSpeaking>(&p)) return {ModelState::Speaking, s->cursor};
  if (const auto* s = std::get_if<phase::AwaitingHuman>(&p)) return {ModelState::Awaiting, s->cursor};
  return {ModelState::Completed, 0};
}

/// Control that advertises `op`; playback reports are not controls.
inline std::optional<Control> control_for(Op op, const ModelState& s) {
  switch (op) {
    case Op::Advance: return s.kind == ModelState::NotStarted ? Control::Start : Control::Next;
    case Op::Back: return Control::Back;
    case Op::Replay: return Control::Replay;
    case Op::Finish: return Control::Finish;
    default: return std::nullopt;
  }
}

/// Applies `op` to a live session. Returns false when the engine refused it
/// with ControlNotAvailable or StaleRequest; other errors propagate.
inline bool apply_op(ReadingSession& s, Op op) {
  try {
    switch (op) {
      case Op::Advance: s.advance(); break;
      case Op::Back: s.step_back(); break;
      case Op::Replay: s.replay_current(); break;
      case Op::Finish: s.finish(); break;
      case Op::PlaybackCurrent: {
        const auto* sp = std::get_if<phase::AgentSpeaking>(&s.phase());
        s.playback_finished(sp ? sp->request_id : 0);
        break;
      }
      case Op::PlaybackStale: {
        const auto* sp = std::get_if<phase::AgentSpeaking>(&s.phase());
        s.playback_finished(sp ? sp->request_id + 1000 : 999'999);
        break;
      }
    }
  } catch (const ControlNotAvailable&) {
    return false;
  } catch (const StaleRequest&) {
    return false;
  }
  return true;
}

}  // namespace storycast::testing
