#include "storycast/service_api.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>

#include "storycast/json_codec.hpp"

namespace storycast {

using nlohmann::json;

struct ReadingService::Live {
  std::string id;
  std::mutex command_mutex;
  BookScript book;
  CastSheet cast;
  /// Engaged from the first successful advance on.
  std::optional<ReadingSession> engine;

  std::mutex events_mutex;
  std::condition_variable events_cv;
  std::vector<ApiEvent> events;

  [[nodiscard]] SessionView view() const {
    return engine ? current_view(*engine) : pending_view(book, cast);
  }
};

std::string_view to_string(ApiEventKind kind) noexcept {
  switch (kind) {
    case ApiEventKind::PhaseChanged: return "PhaseChanged";
    case ApiEventKind::DirectiveIssued: return "DirectiveIssued";
    case ApiEventKind::ControlsChanged: return "ControlsChanged";
    case ApiEventKind::Error: return "Error";
  }
  return "Unknown";
}

ReadingService::ReadingService(LibraryStore& store, TtsGateway& tts, ServiceOptions options)
    : store_(store), tts_(tts), options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_clock();
}

ReadingService::~ReadingService() { shutdown(); }

std::shared_ptr<ReadingService::Live> ReadingService::find(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  if (auto it = sessions_.find(session_id); it != sessions_.end()) return it->second;

  // Not in memory: resume from the persisted record.
  auto record = store_.load_session(session_id);
  auto live = std::make_shared<Live>();
  live->id = record.id;
  live->book = store_.load_book(record.book_id);
  live->cast = record.cast;
  if (!record.events.empty()) {
    live->engine = replay_session(live->book, live->cast, record.id, record.events, options_.clock);
  }
  sessions_.emplace(session_id, live);
  return live;
}

void ReadingService::publish(Live& live, ApiEventKind kind, json payload) {
  {
    std::lock_guard lock(live.events_mutex);
    live.events.push_back(ApiEvent{live.events.size() + 1, kind, std::move(payload)});
  }
  live.events_cv.notify_all();
}

std::string ReadingService::create_session(const std::string& book_id) {
  auto book = store_.load_book(book_id);
  auto live = std::make_shared<Live>();
  live->id = new_session_id();
  live->cast = empty_cast(book, options_.allow_voice_reuse);
  live->book = std::move(book);
  store_.save_session(SessionRecord{live->id, live->book.id, live->cast, phase::NotStarted{}, {}});

  std::lock_guard lock(sessions_mutex_);
  sessions_.emplace(live->id, live);
  return live->id;
}

CastReport ReadingService::set_cast(const std::string& session_id,
                                    const std::map<CharacterId, Reader>& entries) {
  auto live = find(session_id);
  std::lock_guard lock(live->command_mutex);
  try {
    if (live->engine) throw CastLocked();
    auto cast = empty_cast(live->book, options_.allow_voice_reuse);
    for (const auto& [character, reader] : entries) {
      cast = assign(live->book, cast, character, reader);
    }
    auto report = validate_cast(live->book, cast);
    store_.save_session(SessionRecord{live->id, live->book.id, cast, phase::NotStarted{}, {}});
    live->cast = std::move(cast);

    const auto view = live->view();
    publish(*live, ApiEventKind::ControlsChanged,
            {{"controls", codec::to_json(view.controls)},
             {"cast_report", codec::to_json(report)},
             {"view", codec::to_json(view)}});
    return report;
  } catch (const Error& e) {
    publish(*live, ApiEventKind::Error, {{"code", e.code()}, {"message", e.what()}});
    throw;
  }
}

template <class Op>
MutationResult ReadingService::mutate(const std::string& session_id, Op&& op) {
  auto live = find(session_id);
  std::lock_guard lock(live->command_mutex);
  try {
    // Work on a copy; commit only after audio and persistence succeeded.
    std::optional<ReadingSession> next = live->engine;
    auto directive = op(*live, next);

    MutationResult result;
    if (directive) {
      result.directive = directive;
      if (const auto* play = std::get_if<directive::PlayAgent>(&*directive)) {
        const auto asset = tts_.synthesize(SynthesisRequest{play->voice, play->text});
        result.audio_url = "/audio/" + asset.content_hash;
      }
    }
    store_.save_session(make_record(*next));
    live->engine = std::move(next);
    result.view = live->view();

    if (result.directive) {
      publish(*live, ApiEventKind::DirectiveIssued,
              {{"directive", codec::to_json(*result.directive)},
               {"audio_url", result.audio_url ? json(*result.audio_url) : json(nullptr)},
               {"view", codec::to_json(result.view)}});
    } else {
      publish(*live, ApiEventKind::PhaseChanged, {{"view", codec::to_json(result.view)}});
    }
    return result;
  } catch (const StaleRequest&) {
    // Superseded playback; callers ignore it, so the stream stays quiet.
    throw;
  } catch (const Error& e) {
    publish(*live, ApiEventKind::Error, {{"code", e.code()}, {"message", e.what()}});
    throw;
  }
}

namespace {

ReadingSession& started(std::optional<ReadingSession>& s, std::string_view operation) {
  if (!s) throw ControlNotAvailable(operation, phase::NotStarted{});
  return *s;
}

}  // namespace

MutationResult ReadingService::advance(const std::string& session_id) {
  return mutate(session_id, [this](Live& live, std::optional<ReadingSession>& s) {
    if (!s) s = start_session(live.book, live.cast, SessionOptions{live.id, options_.clock});
    return std::optional<TurnDirective>(s->advance());
  });
}

MutationResult ReadingService::step_back(const std::string& session_id) {
  return mutate(session_id, [](Live&, std::optional<ReadingSession>& s) {
    started(s, "Back").step_back();
    return std::optional<TurnDirective>();
  });
}

MutationResult ReadingService::replay(const std::string& session_id) {
  return mutate(session_id, [](Live&, std::optional<ReadingSession>& s) {
    return std::optional<TurnDirective>(started(s, "Replay").replay_current());
  });
}

MutationResult ReadingService::finish(const std::string& session_id) {
  return mutate(session_id, [](Live&, std::optional<ReadingSession>& s) {
    started(s, "Finish").finish();
    return std::optional<TurnDirective>();
  });
}

MutationResult ReadingService::playback_finished(const std::string& session_id,
                                                 std::uint64_t request_id) {
  return mutate(session_id, [request_id](Live&, std::optional<ReadingSession>& s) {
    if (!s) throw StaleRequest(request_id);
    s->playback_finished(request_id);
    return std::optional<TurnDirective>();
  });
}

SessionView ReadingService::view(const std::string& session_id) {
  auto live = find(session_id);
  std::lock_guard lock(live->command_mutex);
  return live->view();
}

std::vector<ApiEvent> ReadingService::events_after(const std::string& session_id,
                                                   std::uint64_t after) {
  auto live = find(session_id);
  std::lock_guard lock(live->events_mutex);
  if (after >= live->events.size()) return {};
  return {live->events.begin() + static_cast<std::ptrdiff_t>(after), live->events.end()};
}

std::vector<ApiEvent> ReadingService::wait_events(const std::string& session_id,
                                                  std::uint64_t after,
                                                  std::chrono::milliseconds timeout) {
  auto live = find(session_id);
  std::unique_lock lock(live->events_mutex);
  live->events_cv.wait_for(lock, timeout,
                           [&] { return live->events.size() > after || shut_down_.load(); });
  if (after >= live->events.size()) return {};
  return {live->events.begin() + static_cast<std::ptrdiff_t>(after), live->events.end()};
}

void ReadingService::shutdown() {
  shut_down_ = true;
  std::lock_guard lock(sessions_mutex_);
  for (auto& [_, live] : sessions_) {
    std::lock_guard events_lock(live->events_mutex);
    live->events_cv.notify_all();
  }
}

bool ReadingService::is_shut_down() const { return shut_down_.load(); }

int http_status_for(const Error& e) noexcept {
  const auto& code = e.code();
  if (code == "NotFound" || code == "UnknownVoice") return 404;
  if (code == "ControlNotAvailable" || code == "IncompleteCast" || code == "VoiceInUse" ||
      code == "StaleRequest" || code == "CastLocked") {
    return 409;
  }
  if (code == "BookMismatch") return 422;
  if (code == "SyntaxError" || code == "SchemaError" || code == "ValidationError" ||
      code == "InvalidRequest" || code == "TextTooLong" || code == "UnknownCharacter" ||
      code == "InvalidBook") {
    return 400;
  }
  if (code == "BackendUnavailable") return 503;
  if (code == "BackendRejected") return 502;
  return 500;
}

json error_body(const Error& e) {
  json detail = {{"code", e.code()}, {"message", e.what()}};
  auto violations = [](const ValidationReport& report) {
    json out = json::array();
    for (const auto& v : report) {
      json item = {{"kind", to_string(v.kind)}, {"message", v.message}};
      if (v.line) item["line"] = *v.line;
      if (v.character) item["character"] = *v.character;
      out.push_back(std::move(item));
    }
    return out;
  };
  if (const auto* s = dynamic_cast<const SchemaError*>(&e)) detail["path"] = s->path();
  if (const auto* s = dynamic_cast<const SyntaxError*>(&e)) detail["byte_offset"] = s->byte_offset();
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    detail["violations"] = violations(v->report());
  }
  if (const auto* v = dynamic_cast<const InvalidBook*>(&e)) {
    detail["violations"] = violations(v->report());
  }
  if (const auto* c = dynamic_cast<const IncompleteCast*>(&e)) {
    json uncast = json::array();
    for (const auto& id : c->uncast()) uncast.push_back(id.value);
    detail["uncast"] = std::move(uncast);
  }
  return {{"error", std::move(detail)}};
}

json to_json(const MutationResult& result) {
  json body = codec::to_json(result.view);
  if (result.directive) {
    body["directive"] = codec::to_json(*result.directive);
    body["directive"]["audio_url"] = result.audio_url ? json(*result.audio_url) : json(nullptr);
  }
  return body;
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  explicit Impl(ReadingService& s) : service(s) { routes(); }

  ReadingService& service;
  httplib::Server server;

  static void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_wav(httplib::Response& res, const AudioAsset& asset) {
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
    res.set_header("ETag", "\"" + asset.content_hash + "\"");
    res.set_content(std::string(asset.bytes.begin(), asset.bytes.end()), "audio/wav");
  }

  template <class Handler>
  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_json(res, error_body(e), http_status_for(e));
      } catch (const json::exception& e) {
        send_json(res, {{"error", {{"code", "BadRequest"}, {"message", e.what()}}}}, 400);
      } catch (const std::exception& e) {
        send_json(res, {{"error", {{"code", "Internal"}, {"message", e.what()}}}}, 500);
      }
    };
  }

  static json parse_body(const httplib::Request& req) {
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) throw SyntaxError(0, "request body is not valid JSON");
    return body;
  }

  static std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw InvalidRequest("'" + text + "' is not a sequence number");
    }
    return v;
  }

  void routes() {
    server.Get("/books", guarded([this](const auto&, auto& res) {
      json out = json::array();
      for (const auto& b : service.list_books()) {
        out.push_back({{"id", b.id},
                       {"title", b.title},
                       {"age_min", b.age_range.min},
                       {"age_max", b.age_range.max}});
      }
      send_json(res, out);
    }));

    server.Get(R"(/books/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto book = service.get_book(req.matches[1]);
      res.set_content(serialize_book(book).bytes, "application/json");
    }));

    server.Post("/books", guarded([this](const auto& req, auto& res) {
      send_json(res, {{"id", service.import_book(BookDocument{req.body})}}, 201);
    }));

    server.Get("/voices", guarded([this](const auto&, auto& res) {
      json out = json::array();
      for (const auto& v : service.list_voices()) out.push_back(codec::to_json(v));
      send_json(res, out);
    }));

    server.Get(R"(/voices/([^/]+)/preview)", guarded([this](const auto& req, auto& res) {
      const std::string raw = req.matches[1];
      int id = 0;
      auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), id);
      if (ec != std::errc{} || ptr != raw.data() + raw.size()) throw NotFound("voice '" + raw + "'");
      send_wav(res, service.voice_preview(VoiceId(id)));
    }));

    server.Get(R"(/audio/([0-9a-f]+))", guarded([this](const auto& req, auto& res) {
      const std::string hash = req.matches[1];
      auto asset = service.audio(hash);
      if (!asset) throw NotFound("audio '" + hash + "'");
      send_wav(res, *asset);
    }));

    server.Post("/sessions", guarded([this](const auto& req, auto& res) {
      const auto body = parse_body(req);
      if (!body.is_object() || !body.contains("book_id") || !body["book_id"].is_string()) {
        throw SchemaError("book_id", "expected string");
      }
      send_json(res, {{"id", service.create_session(body["book_id"].template get<std::string>())}},
                201);
    }));

    server.Put(R"(/sessions/([^/]+)/cast)", guarded([this](const auto& req, auto& res) {
      const auto entries = codec::entries_from_json(parse_body(req));
      send_json(res, codec::to_json(service.set_cast(req.matches[1], entries)));
    }));

    auto command = [this](const char* pattern, auto call) {
      server.Post(pattern, guarded([this, call](const auto& req, auto& res) {
        send_json(res, to_json(call(service, std::string(req.matches[1]))));
      }));
    };
    command(R"(/sessions/([^/]+)/advance)",
            [](ReadingService& s, const std::string& id) { return s.advance(id); });
    command(R"(/sessions/([^/]+)/back)",
            [](ReadingService& s, const std::string& id) { return s.step_back(id); });
    command(R"(/sessions/([^/]+)/replay)",
            [](ReadingService& s, const std::string& id) { return s.replay(id); });
    command(R"(/sessions/([^/]+)/finish)",
            [](ReadingService& s, const std::string& id) { return s.finish(id); });

    server.Post(R"(/sessions/([^/]+)/playback-finished)",
                guarded([this](const auto& req, auto& res) {
                  const auto body = parse_body(req);
                  if (!body.is_object() || !body.contains("request_id") ||
                      !body["request_id"].is_number_unsigned()) {
                    throw SchemaError("request_id", "expected non-negative integer");
                  }
                  send_json(res, to_json(service.playback_finished(
                                     req.matches[1], body["request_id"].template get<std::uint64_t>())));
                }));

    server.Get(R"(/sessions/([^/]+))", guarded([this](const auto& req, auto& res) {
      send_json(res, codec::to_json(service.view(req.matches[1])));
    }));

    server.Get(R"(/sessions/([^/]+)/events)", guarded([this](const auto& req, auto& res) {
      const std::string id = req.matches[1];
      std::uint64_t after = 0;
      if (req.has_param("after")) {
        after = parse_u64(req.get_param_value("after"));
      } else if (req.has_header("Last-Event-ID")) {
        after = parse_u64(req.get_header_value("Last-Event-ID"));
      }
      const bool follow = req.get_param_value("follow") != "false";
      service.events_after(id, after);  // 404 before the stream opens

      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream", [this, id, after, follow](std::size_t, httplib::DataSink& sink) mutable {
            for (;;) {
              if (!sink.is_writable()) return false;
              auto events = follow ? service.wait_events(id, after, std::chrono::milliseconds(200))
                                   : service.events_after(id, after);
              for (const auto& e : events) {
                const auto frame = "id: " + std::to_string(e.seq) + "\nevent: " +
                                   std::string(to_string(e.kind)) + "\ndata: " + e.payload.dump() +
                                   "\n\n";
                if (!sink.write(frame.data(), frame.size())) return false;
                after = e.seq;
              }
              if (!follow || service.is_shut_down()) {
                sink.done();
                return true;
              }
              if (!events.empty()) return true;
            }
          });
    }));
  }
};

HttpServer::HttpServer(ReadingService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  impl_->service.shutdown();
  impl_->server.stop();
}

}  // namespace storycast
