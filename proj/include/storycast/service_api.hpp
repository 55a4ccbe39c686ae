// Session service: the HTTP surface over the library, the TTS gateway and
// the turn engine.
//
// ReadingService holds all behaviour and is usable without a network; the
// HttpServer maps it onto these endpoints:
//
//   GET  /books                         book summaries
//   GET  /books/{id}                    full book document
//   POST /books                         import a book document -> {"id"}
//   GET  /voices                        the six voice profiles
//   GET  /voices/{id}/preview           greeting clip (audio/wav)
//   POST /sessions {"book_id"}          -> {"id"}
//   PUT  /sessions/{id}/cast            {character: reader} -> cast report
//   POST /sessions/{id}/advance|back|replay|finish        -> view
//   POST /sessions/{id}/playback-finished {"request_id"}  -> view
//   GET  /sessions/{id}                 view
//   GET  /sessions/{id}/events          server-sent events (?after=N or
//                                       Last-Event-ID; ?follow=false closes
//                                       after the backlog)
//   GET  /audio/{hash}                  synthesized clip (audio/wav)

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "storycast/library_store.hpp"
#include "storycast/session_engine.hpp"
#include "storycast/tts_gateway.hpp"

namespace storycast {

enum class ApiEventKind : std::uint8_t { PhaseChanged, DirectiveIssued, ControlsChanged, Error };

std::string_view to_string(ApiEventKind kind) noexcept;

/// One entry of a session's live stream. `seq` starts at 1 and has no gaps.
struct ApiEvent {
  std::uint64_t seq = 0;
  ApiEventKind kind = ApiEventKind::PhaseChanged;
  nlohmann::json payload;
};

/// Result of a mutation: the post-transition view and, for advance/replay,
/// the directive that was issued.
struct MutationResult {
  SessionView view;
  std::optional<TurnDirective> directive;
  /// `/audio/{hash}` for PlayAgent directives.
  std::optional<std::string> audio_url;
};

class CastLocked : public Error {
 public:
  CastLocked() : Error("CastLocked", "the cast cannot change once reading has started") {}
};

struct ServiceOptions {
  bool allow_voice_reuse = false;
  /// Clock for new sessions; system clock when empty.
  Clock clock;
};

class ReadingService {
 public:
  ReadingService(LibraryStore& store, TtsGateway& tts, ServiceOptions options = {});
  ~ReadingService();

  ReadingService(const ReadingService&) = delete;
  ReadingService& operator=(const ReadingService&) = delete;

  [[nodiscard]] std::vector<BookSummary> list_books() const { return store_.list_books(); }
  [[nodiscard]] BookScript get_book(const std::string& id) const { return store_.load_book(id); }
  std::string import_book(const BookDocument& doc) { return store_.import_book(doc); }

  [[nodiscard]] const std::vector<VoiceProfile>& list_voices() const {
    return TtsGateway::list_voices();
  }
  AudioAsset voice_preview(VoiceId voice) { return tts_.synthesize(preview_greeting(voice)); }
  [[nodiscard]] std::optional<AudioAsset> audio(const std::string& hash) const {
    return tts_.lookup(hash);
  }

  /// Throws NotFound for an unknown book.
  std::string create_session(const std::string& book_id);

  /// Replaces the whole cast. Throws CastLocked once reading started,
  /// UnknownCharacter, VoiceInUse.
  CastReport set_cast(const std::string& session_id, const std::map<CharacterId, Reader>& entries);

  MutationResult advance(const std::string& session_id);
  MutationResult step_back(const std::string& session_id);
  MutationResult replay(const std::string& session_id);
  MutationResult finish(const std::string& session_id);
  MutationResult playback_finished(const std::string& session_id, std::uint64_t request_id);

  [[nodiscard]] SessionView view(const std::string& session_id);

  /// Events with seq > after, in order.
  std::vector<ApiEvent> events_after(const std::string& session_id, std::uint64_t after);

  /// Blocks until an event with seq > after exists, the timeout elapses or
  /// shutdown() is called.
  std::vector<ApiEvent> wait_events(const std::string& session_id, std::uint64_t after,
                                    std::chrono::milliseconds timeout);

  /// Wakes every waiter; subsequent waits return immediately.
  void shutdown();
  [[nodiscard]] bool is_shut_down() const;

 private:
  struct Live;

  std::shared_ptr<Live> find(const std::string& session_id);
  template <class Op>
  MutationResult mutate(const std::string& session_id, Op&& op);
  void publish(Live& live, ApiEventKind kind, nlohmann::json payload);

  LibraryStore& store_;
  TtsGateway& tts_;
  ServiceOptions options_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
  std::atomic<bool> shut_down_{false};
};

/// Status code for an error raised by ReadingService.
int http_status_for(const Error& e) noexcept;

/// {"error": {"code", "message", ...details}}.
nlohmann::json error_body(const Error& e);

nlohmann::json to_json(const MutationResult& result);

class HttpServer {
 public:
  explicit HttpServer(ReadingService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);

  /// Binds to an ephemeral port and returns it (or -1); call
  /// listen_after_bind() on a worker thread afterwards.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();

  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace storycast
