// storycast-server: serves the library, voices and reading sessions over HTTP.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "storycast/service_api.hpp"

namespace {

storycast::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint-reading session server"};
  int port = 8080;
  std::string library = "library";
  std::string tts = "mock";
  bool allow_voice_reuse = false;
  app.add_option("--port", port, "TCP port")->capture_default_str()->check(CLI::Range(1, 65535));
  app.add_option("--library", library, "Library directory (books/, sessions/, cache/)")
      ->capture_default_str();
  app.add_option("--tts", tts, "Speech backend")
      ->capture_default_str()
      ->check(CLI::IsMember({"mock", "remote"}));
  app.add_flag("--allow-voice-reuse", allow_voice_reuse,
               "Let one Mate voice more than one character");
  CLI11_PARSE(app, argc, argv);

  try {
    storycast::LibraryStore store(library);

    std::unique_ptr<storycast::SynthesisBackend> backend;
    if (tts == "remote") {
      const char* key = std::getenv("TTS_API_KEY");
      if (key == nullptr || *key == '\0') {
        std::cerr << "error: --tts remote needs TTS_API_KEY\n";
        return 2;
      }
      const char* endpoint = std::getenv("TTS_ENDPOINT");
      backend = std::make_unique<storycast::RemoteBackend>(
          "cloud-tts-v1", storycast::cloud_tts_transport(
                              key, endpoint ? endpoint : std::string(storycast::kCloudTtsEndpoint)));
    } else {
      backend = std::make_unique<storycast::MockBackend>();
    }
    storycast::TtsGateway gateway(std::move(backend), store.cache_dir());

    storycast::ServiceOptions options;
    options.allow_voice_reuse = allow_voice_reuse;
    storycast::ReadingService service(store, gateway, options);
    storycast::HttpServer server(service);

    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::cout << "storycast-server listening on port " << port << " (library " << library
              << ", tts " << gateway.backend_id() << ")" << std::endl;
    if (!server.listen("0.0.0.0", port)) {
      std::cerr << "error: cannot listen on port " << port << '\n';
      return 1;
    }
    g_server = nullptr;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
