// Text-to-speech behind a content-addressed audio cache.
//
// Every clip is a mono PCM16 WAV at 22050 Hz. A clip is keyed by the SHA-256
// of (voice, text, format, backend id), so switching backends never serves
// audio produced by another one.
//
// Cache layout under the cache root:
//   <first two hex digits>/<hash>.wav
//   index.tsv   (hash, voice, byte length, duration_ms; tab separated)

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storycast/casting.hpp"

namespace storycast {

inline constexpr int kSampleRate = 22050;

using AudioBytes = std::vector<std::uint8_t>;

struct AudioAsset {
  std::string content_hash;
  AudioBytes bytes;
  std::int64_t duration_ms = 0;

  bool operator==(const AudioAsset&) const = default;
};

class InvalidRequest : public Error {
 public:
  explicit InvalidRequest(const std::string& message) : Error("InvalidRequest", message) {}
};

class TextTooLong : public Error {
 public:
  explicit TextTooLong(std::size_t chars)
      : Error("TextTooLong", "text has " + std::to_string(chars) + " characters, limit is " +
                                 std::to_string(kMaxLineChars)) {}
};

/// Transient backend failure. Safe to retry.
class BackendUnavailable : public Error {
 public:
  explicit BackendUnavailable(const std::string& message) : Error("BackendUnavailable", message) {}
};

/// Throws InvalidRequest or TextTooLong.
void check_request(const SynthesisRequest& req);

/// Hex SHA-256 over the request fields and the backend id.
std::string content_hash(const SynthesisRequest& req, std::string_view backend_id);

struct WavInfo {
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  std::size_t data_bytes = 0;
};

/// Parses a canonical RIFF/WAVE header. Empty when the bytes are not a WAV.
std::optional<WavInfo> parse_wav_header(std::span<const std::uint8_t> bytes);

/// Duration implied by the header, rounded to the nearest millisecond.
std::optional<std::int64_t> wav_duration_ms(std::span<const std::uint8_t> bytes);

class SynthesisBackend {
 public:
  virtual ~SynthesisBackend() = default;

  /// Stable identifier folded into every content hash.
  [[nodiscard]] virtual std::string id() const = 0;

  /// Returns a WAV in kAudioFormat.
  virtual AudioBytes synthesize(const SynthesisRequest& req, const VoiceProfile& voice) = 0;
};

/// Offline deterministic backend: a sine at 200 + 40 * voice Hz, amplitude
/// 0.5, lasting 80 ms per character (300 ms minimum).
class MockBackend final : public SynthesisBackend {
 public:
  [[nodiscard]] std::string id() const override { return "mock-v1"; }
  AudioBytes synthesize(const SynthesisRequest& req, const VoiceProfile& voice) override;

  static double frequency_hz(VoiceId voice) noexcept { return 200.0 + 40.0 * voice.value(); }
  static std::int64_t duration_ms(std::string_view text) noexcept;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{200};
};

using RemoteTransport = std::function<AudioBytes(const SynthesisRequest&, const VoiceProfile&)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Wraps a vendor transport with exponential backoff. Only
/// BackendUnavailable is retried; other errors propagate at once.
class RemoteBackend final : public SynthesisBackend {
 public:
  RemoteBackend(std::string id, RemoteTransport transport, RetryPolicy policy = {},
                Sleeper sleep = {});

  [[nodiscard]] std::string id() const override { return id_; }
  AudioBytes synthesize(const SynthesisRequest& req, const VoiceProfile& voice) override;

 private:
  std::string id_;
  RemoteTransport transport_;
  RetryPolicy policy_;
  Sleeper sleep_;
};

inline constexpr std::string_view kCloudTtsEndpoint = "https://texttospeech.googleapis.com";

/// Transport for the cloud `v1/text:synthesize` REST call (LINEAR16 output).
RemoteTransport cloud_tts_transport(std::string api_key, std::string endpoint =
                                                             std::string(kCloudTtsEndpoint));

/// On-disk clip store. Thread safe.
class AudioCache {
 public:
  explicit AudioCache(std::filesystem::path root);

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::filesystem::path path_for(const std::string& hash) const;

  std::optional<AudioAsset> find(const std::string& hash) const;
  void store(const AudioAsset& asset, VoiceId voice);
  [[nodiscard]] std::size_t size() const;

 private:
  struct IndexEntry {
    int voice;
    std::size_t bytes;
    std::int64_t duration_ms;
  };

  std::filesystem::path root_;
  mutable std::mutex mutex_;
  std::map<std::string, IndexEntry> index_;
};

class TtsGateway {
 public:
  TtsGateway(std::unique_ptr<SynthesisBackend> backend, std::filesystem::path cache_root);

  /// Cached clip for `req`, synthesizing on a miss. Concurrent identical
  /// requests share one backend call. Throws InvalidRequest, TextTooLong,
  /// BackendUnavailable.
  AudioAsset synthesize(const SynthesisRequest& req);

  /// Clip by hash, if cached.
  std::optional<AudioAsset> lookup(const std::string& hash) const { return cache_.find(hash); }

  [[nodiscard]] std::string backend_id() const { return backend_->id(); }
  [[nodiscard]] std::uint64_t backend_calls() const noexcept { return backend_calls_.load(); }

  static const std::vector<VoiceProfile>& list_voices() { return voice_profiles(); }

 private:
  AudioAsset synthesize_uncached(const SynthesisRequest& req, const std::string& hash);

  std::unique_ptr<SynthesisBackend> backend_;
  AudioCache cache_;
  std::mutex inflight_mutex_;
  std::map<std::string, std::shared_future<AudioAsset>> inflight_;
  std::atomic<std::uint64_t> backend_calls_{0};
};

}  // namespace storycast
