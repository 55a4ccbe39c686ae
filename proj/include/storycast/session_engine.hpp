// Parent-paced turn-taking over a cast book.
//
// A session walks the book's lines in order. Every transition is driven by
// an explicit control press (Start/Next/Back/Replay/Finish) or by the audio
// layer reporting that an agent clip finished playing. The engine never
// times anything itself.
//
//   NotStarted --Start--> AgentSpeaking(0) | AwaitingHuman(0)
//   Idle(c) --Next--> AgentSpeaking(c) | AwaitingHuman(c)
//   AgentSpeaking(c) --playback finished--> Idle(c+1) | Completed
//   AwaitingHuman(c) --Next--> AgentSpeaking(c+1) | AwaitingHuman(c+1) | Completed
//   Idle/AwaitingHuman/Completed --Back--> Idle(previous)
//
// ReadingSession has a single logical owner; callers serialize access.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "storycast/casting.hpp"
#include "storycast/script_model.hpp"

namespace storycast {

enum class Control : std::uint8_t { Start, Next, Back, Replay, Finish };

std::string_view to_string(Control c) noexcept;
std::optional<Control> control_from_string(std::string_view name) noexcept;

/// Small set of controls with a fixed iteration order.
class ControlSet {
 public:
  constexpr ControlSet() = default;
  constexpr ControlSet(std::initializer_list<Control> controls) {
    for (auto c : controls) insert(c);
  }

  constexpr void insert(Control c) noexcept { bits_ |= bit(c); }
  [[nodiscard]] constexpr bool contains(Control c) const noexcept { return (bits_ & bit(c)) != 0; }
  [[nodiscard]] constexpr bool empty() const noexcept { return bits_ == 0; }
  [[nodiscard]] std::vector<Control> to_vector() const;

  constexpr bool operator==(const ControlSet&) const = default;

 private:
  static constexpr std::uint8_t bit(Control c) noexcept {
    return static_cast<std::uint8_t>(1U << static_cast<unsigned>(c));
  }
  std::uint8_t bits_ = 0;
};

namespace phase {
struct NotStarted {
  bool operator==(const NotStarted&) const = default;
};
struct Idle {
  std::size_t cursor;
  bool operator==(const Idle&) const = default;
};
struct AgentSpeaking {
  std::size_t cursor;
  std::uint64_t request_id;
  bool operator==(const AgentSpeaking&) const = default;
};
struct AwaitingHuman {
  std::size_t cursor;
  bool operator==(const AwaitingHuman&) const = default;
};
struct Completed {
  bool operator==(const Completed&) const = default;
};
}  // namespace phase

using SessionPhase = std::variant<phase::NotStarted, phase::Idle, phase::AgentSpeaking,
                                  phase::AwaitingHuman, phase::Completed>;

std::string_view phase_name(const SessionPhase& p) noexcept;
std::optional<std::size_t> cursor_of(const SessionPhase& p) noexcept;

/// Controls offered in each phase.
ControlSet controls_for(const SessionPhase& p) noexcept;

namespace directive {
struct PlayAgent {
  std::size_t line_index;
  VoiceId voice;
  std::string text;
  /// Completion token for playback_finished().
  std::uint64_t request_id;
  bool operator==(const PlayAgent&) const = default;
};
struct AwaitHuman {
  std::size_t line_index;
  HumanReader reader;
  bool operator==(const AwaitHuman&) const = default;
};
struct SessionComplete {
  bool operator==(const SessionComplete&) const = default;
};
}  // namespace directive

using TurnDirective =
    std::variant<directive::PlayAgent, directive::AwaitHuman, directive::SessionComplete>;

std::string_view directive_name(const TurnDirective& d) noexcept;

enum class EventKind : std::uint8_t {
  SessionCreated,
  Advanced,
  SteppedBack,
  Replayed,
  PlaybackFinished,
  Finished,
};

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept;

/// One entry of the append-only interaction log. `line` is the line the
/// transition performed or moved to; `request_id` is set for agent playback.
struct SessionEvent {
  std::int64_t timestamp_us = 0;
  EventKind kind = EventKind::SessionCreated;
  std::optional<std::size_t> line;
  std::optional<std::uint64_t> request_id;

  bool operator==(const SessionEvent&) const = default;
};

/// Microsecond timestamps. Sessions force strict monotonicity on top.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

class ControlNotAvailable : public Error {
 public:
  ControlNotAvailable(std::string_view operation, const SessionPhase& p);
};

class StaleRequest : public Error {
 public:
  explicit StaleRequest(std::uint64_t request_id)
      : Error("StaleRequest",
              "playback request " + std::to_string(request_id) + " is not the active playback") {}
};

class IncompleteCast : public Error {
 public:
  explicit IncompleteCast(std::vector<CharacterId> uncast);
  [[nodiscard]] const std::vector<CharacterId>& uncast() const noexcept { return uncast_; }

 private:
  std::vector<CharacterId> uncast_;
};

/// Random 16-hex-digit identifier.
std::string new_session_id();

struct SessionOptions {
  /// Generated when empty.
  std::string id;
  /// system_clock() when empty.
  Clock clock;
};

class ReadingSession {
 public:
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] const BookScript& book() const noexcept { return book_; }
  [[nodiscard]] const CastSheet& cast() const noexcept { return cast_; }
  [[nodiscard]] const SessionPhase& phase() const noexcept { return phase_; }
  [[nodiscard]] const std::vector<SessionEvent>& event_log() const noexcept { return log_; }

  /// Line highlighted in green: the cursor while an agent speaks or a human
  /// reader is awaited.
  [[nodiscard]] std::optional<std::size_t> highlight() const noexcept;
  [[nodiscard]] ControlSet controls() const noexcept { return controls_for(phase_); }

  /// Start/Next. Throws ControlNotAvailable.
  TurnDirective advance();
  /// Throws StaleRequest unless an agent is speaking under `request_id`.
  void playback_finished(std::uint64_t request_id);
  /// Back. Throws ControlNotAvailable.
  void step_back();
  /// Replay. Re-performs the line under the cursor. Throws ControlNotAvailable.
  TurnDirective replay_current();
  /// Finish. Only available once the book is completed.
  void finish();

 private:
  friend ReadingSession start_session(BookScript, CastSheet, SessionOptions);
  friend ReadingSession replay_session(const BookScript&, const CastSheet&, const std::string&,
                                       const std::vector<SessionEvent>&, Clock);

  ReadingSession(std::string id, BookScript book, CastSheet cast, Clock clock);

  TurnDirective perform(std::size_t line);
  void require(Control c, std::string_view operation) const;
  void record(EventKind kind, std::optional<std::size_t> line = {},
              std::optional<std::uint64_t> request_id = {});

  std::string id_;
  BookScript book_;
  CastSheet cast_;
  Clock clock_;
  SessionPhase phase_ = phase::NotStarted{};
  std::uint64_t next_request_id_ = 1;
  std::vector<SessionEvent> log_;
};

/// Throws InvalidBook, BookMismatch or IncompleteCast.
ReadingSession start_session(BookScript book, CastSheet cast, SessionOptions options = {});

inline ControlSet available_controls(const ReadingSession& s) noexcept { return s.controls(); }

/// Rebuilds a session by re-applying a recorded log. The rebuilt session's
/// log equals `events`; later transitions are stamped by `clock`. Throws
/// Error("CorruptLog") when the log does not replay cleanly.
ReadingSession replay_session(const BookScript& book, const CastSheet& cast, const std::string& id,
                              const std::vector<SessionEvent>& events, Clock clock = {});

struct LineView {
  std::size_t index = 0;
  int page = 1;
  CharacterId character;
  std::string character_name;
  std::optional<std::string> portrait;
  std::string text;
  /// Cast reader for this line's character, if any.
  std::optional<Reader> reader;

  bool operator==(const LineView&) const = default;
};

struct SessionView {
  std::string book_id;
  std::string title;
  SessionPhase phase;
  std::optional<std::size_t> highlight;
  ControlSet controls;
  std::vector<LineView> lines;

  bool operator==(const SessionView&) const = default;
};

SessionView current_view(const ReadingSession& session);

/// View of a session whose cast is still being edited (not yet started).
SessionView pending_view(const BookScript& book, const CastSheet& cast);

}  // namespace storycast
