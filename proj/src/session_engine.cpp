#include "storycast/session_engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <random>

#include "storycast/script_parser.hpp"

namespace storycast {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<std::string_view, 5> kControlNames = {"Start", "Next", "Back", "Replay",
                                                           "Finish"};
constexpr std::array<std::string_view, 6> kEventNames = {
    "SessionCreated", "Advanced", "SteppedBack", "Replayed", "PlaybackFinished", "Finished"};

std::string join_ids(const std::vector<CharacterId>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id.value;
  }
  return out;
}

}  // namespace

std::string_view to_string(Control c) noexcept { return kControlNames[static_cast<std::size_t>(c)]; }

std::optional<Control> control_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kControlNames.size(); ++i) {
    if (kControlNames[i] == name) return static_cast<Control>(i);
  }
  return std::nullopt;
}

std::vector<Control> ControlSet::to_vector() const {
  std::vector<Control> out;
  for (std::size_t i = 0; i < kControlNames.size(); ++i) {
    if (contains(static_cast<Control>(i))) out.push_back(static_cast<Control>(i));
  }
  return out;
}

std::string_view phase_name(const SessionPhase& p) noexcept {
  return std::visit(overloaded{
                        [](const phase::NotStarted&) { return std::string_view("NotStarted"); },
                        [](const phase::Idle&) { return std::string_view("Idle"); },
                        [](const phase::AgentSpeaking&) { return std::string_view("AgentSpeaking"); },
                        [](const phase::AwaitingHuman&) { return std::string_view("AwaitingHuman"); },
                        [](const phase::Completed&) { return std::string_view("Completed"); },
                    },
                    p);
}

std::optional<std::size_t> cursor_of(const SessionPhase& p) noexcept {
  return std::visit(overloaded{
                        [](const phase::Idle& s) -> std::optional<std::size_t> { return s.cursor; },
                        [](const phase::AgentSpeaking& s) -> std::optional<std::size_t> {
                          return s.cursor;
                        },
                        [](const phase::AwaitingHuman& s) -> std::optional<std::size_t> {
                          return s.cursor;
                        },
                        [](const auto&) -> std::optional<std::size_t> { return std::nullopt; },
                    },
                    p);
}

ControlSet controls_for(const SessionPhase& p) noexcept {
  using enum Control;
  return std::visit(overloaded{
                        [](const phase::NotStarted&) { return ControlSet{Start}; },
                        [](const phase::Idle& s) {
                          return s.cursor == 0 ? ControlSet{Next, Replay}
                                               : ControlSet{Next, Back, Replay};
                        },
                        [](const phase::AgentSpeaking&) { return ControlSet{}; },
                        [](const phase::AwaitingHuman&) { return ControlSet{Next, Back, Replay}; },
                        [](const phase::Completed&) { return ControlSet{Back, Finish}; },
                    },
                    p);
}

std::string_view directive_name(const TurnDirective& d) noexcept {
  return std::visit(overloaded{
                        [](const directive::PlayAgent&) { return std::string_view("PlayAgent"); },
                        [](const directive::AwaitHuman&) { return std::string_view("AwaitHuman"); },
                        [](const directive::SessionComplete&) {
                          return std::string_view("SessionComplete");
                        },
                    },
                    d);
}

std::string_view to_string(EventKind kind) noexcept {
  return kEventNames[static_cast<std::size_t>(kind)];
}

std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string new_session_id() {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  std::uniform_int_distribution<int> nibble(0, 15);
  std::string id(16, '0');
  for (auto& ch : id) ch = kHex[nibble(rd)];
  return id;
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

ControlNotAvailable::ControlNotAvailable(std::string_view operation, const SessionPhase& p)
    : Error("ControlNotAvailable", std::string(operation) + " is not available while " +
                                       std::string(phase_name(p))) {}

IncompleteCast::IncompleteCast(std::vector<CharacterId> uncast)
    : Error("IncompleteCast", "characters without a reader: " + join_ids(uncast)),
      uncast_(std::move(uncast)) {}

ReadingSession::ReadingSession(std::string id, BookScript book, CastSheet cast, Clock clock)
    : id_(std::move(id)), book_(std::move(book)), cast_(std::move(cast)), clock_(std::move(clock)) {}

std::optional<std::size_t> ReadingSession::highlight() const noexcept {
  if (const auto* s = std::get_if<phase::AgentSpeaking>(&phase_)) return s->cursor;
  if (const auto* s = std::get_if<phase::AwaitingHuman>(&phase_)) return s->cursor;
  return std::nullopt;
}

void ReadingSession::require(Control c, std::string_view operation) const {
  if (!controls().contains(c)) throw ControlNotAvailable(operation, phase_);
}

void ReadingSession::record(EventKind kind, std::optional<std::size_t> line,
                            std::optional<std::uint64_t> request_id) {
  auto ts = clock_();
  if (!log_.empty()) ts = std::max(ts, log_.back().timestamp_us + 1);
  log_.push_back(SessionEvent{ts, kind, line, request_id});
}

TurnDirective ReadingSession::perform(std::size_t line) {
  const auto& l = book_.lines[line];
  const Reader* reader = cast_.reader_for(l.character);
  // start_session guarantees every speaker is cast.
  if (const auto* agent = std::get_if<AgentVoice>(reader)) {
    const auto request_id = next_request_id_++;
    phase_ = phase::AgentSpeaking{line, request_id};
    return directive::PlayAgent{line, agent->voice, l.text, request_id};
  }
  phase_ = phase::AwaitingHuman{line};
  HumanReader human = std::holds_alternative<HumanAdult>(*reader) ? HumanReader{HumanAdult{}}
                                                                  : HumanReader{HumanChild{}};
  return directive::AwaitHuman{line, human};
}

TurnDirective ReadingSession::advance() {
  const auto offered = controls();
  if (!offered.contains(Control::Start) && !offered.contains(Control::Next)) {
    throw ControlNotAvailable("Next", phase_);
  }

  std::size_t target = 0;
  if (const auto* idle = std::get_if<phase::Idle>(&phase_)) {
    target = idle->cursor;
  } else if (const auto* waiting = std::get_if<phase::AwaitingHuman>(&phase_)) {
    target = waiting->cursor + 1;
  }

  if (target >= book_.lines.size()) {
    phase_ = phase::Completed{};
    record(EventKind::Advanced);
    return directive::SessionComplete{};
  }
  auto d = perform(target);
  const auto* play = std::get_if<directive::PlayAgent>(&d);
  record(EventKind::Advanced, target,
         play ? std::optional<std::uint64_t>(play->request_id) : std::nullopt);
  return d;
}

void ReadingSession::playback_finished(std::uint64_t request_id) {
  const auto* speaking = std::get_if<phase::AgentSpeaking>(&phase_);
  if (speaking == nullptr || speaking->request_id != request_id) throw StaleRequest(request_id);

  const auto finished = speaking->cursor;
  if (finished + 1 < book_.lines.size()) {
    phase_ = phase::Idle{finished + 1};
  } else {
    phase_ = phase::Completed{};
  }
  record(EventKind::PlaybackFinished, finished, request_id);
}

void ReadingSession::step_back() {
  require(Control::Back, "Back");
  std::size_t cursor = 0;
  if (std::holds_alternative<phase::Completed>(phase_)) {
    cursor = book_.lines.size() - 1;
  } else {
    const auto c = cursor_of(phase_).value_or(0);
    cursor = c == 0 ? 0 : c - 1;
  }
  phase_ = phase::Idle{cursor};
  record(EventKind::SteppedBack, cursor);
}

TurnDirective ReadingSession::replay_current() {
  require(Control::Replay, "Replay");
  const auto cursor = cursor_of(phase_).value_or(0);
  auto d = perform(cursor);
  const auto* play = std::get_if<directive::PlayAgent>(&d);
  record(EventKind::Replayed, cursor,
         play ? std::optional<std::uint64_t>(play->request_id) : std::nullopt);
  return d;
}

void ReadingSession::finish() {
  require(Control::Finish, "Finish");
  record(EventKind::Finished);
}

ReadingSession start_session(BookScript book, CastSheet cast, SessionOptions options) {
  if (auto report = validate_book(book); !report.empty()) throw InvalidBook(report);
  auto cast_report = validate_cast(book, cast);
  if (!cast_report.complete) throw IncompleteCast(std::move(cast_report.uncast));

  auto id = options.id.empty() ? new_session_id() : std::move(options.id);
  auto clock = options.clock ? std::move(options.clock) : system_clock();
  ReadingSession session(std::move(id), std::move(book), std::move(cast), std::move(clock));
  session.record(EventKind::SessionCreated);
  return session;
}

ReadingSession replay_session(const BookScript& book, const CastSheet& cast, const std::string& id,
                              const std::vector<SessionEvent>& events, Clock clock) {
  if (events.empty() || events.front().kind != EventKind::SessionCreated) {
    throw Error("CorruptLog", "event log must begin with SessionCreated");
  }
  std::size_t next = 0;
  SessionOptions options;
  options.id = id;
  options.clock = [&events, &next] { return events[std::min(next, events.size() - 1)].timestamp_us; };

  auto session = start_session(book, cast, std::move(options));
  for (next = 1; next < events.size(); ++next) {
    const auto& e = events[next];
    switch (e.kind) {
      case EventKind::Advanced:
        session.advance();
        break;
      case EventKind::SteppedBack:
        session.step_back();
        break;
      case EventKind::Replayed:
        session.replay_current();
        break;
      case EventKind::PlaybackFinished:
        session.playback_finished(e.request_id.value_or(0));
        break;
      case EventKind::Finished:
        session.finish();
        break;
      case EventKind::SessionCreated:
        throw Error("CorruptLog", "SessionCreated may only appear first");
    }
    if (session.log_.back() != e) {
      throw Error("CorruptLog", "event " + std::to_string(next) + " (" +
                                    std::string(to_string(e.kind)) + ") does not replay");
    }
  }
  if (session.log_.front() != events.front()) {
    throw Error("CorruptLog", "SessionCreated entry does not replay");
  }
  session.clock_ = clock ? std::move(clock) : system_clock();
  return session;
}

namespace {

std::vector<LineView> line_views(const BookScript& book, const CastSheet& cast) {
  std::vector<LineView> out;
  out.reserve(book.lines.size());
  for (const auto& line : book.lines) {
    LineView v;
    v.index = line.index;
    v.page = line.page;
    v.character = line.character;
    if (const auto* c = book.find_character(line.character)) {
      v.character_name = c->display_name;
      v.portrait = c->portrait;
    }
    v.text = line.text;
    if (const auto* r = cast.reader_for(line.character)) v.reader = *r;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

SessionView current_view(const ReadingSession& session) {
  return SessionView{session.book().id,   session.book().title, session.phase(),
                     session.highlight(), session.controls(),   line_views(session.book(), session.cast())};
}

SessionView pending_view(const BookScript& book, const CastSheet& cast) {
  const SessionPhase p = phase::NotStarted{};
  return SessionView{book.id, book.title, p, std::nullopt, controls_for(p), line_views(book, cast)};
}

}  // namespace storycast
