#include "storycast/tts_gateway.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "file_io.hpp"

namespace storycast {

namespace {

void put_u16(AudioBytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(AudioBytes& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

AudioBytes pcm16_wav(const std::vector<std::int16_t>& samples) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  AudioBytes out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, kSampleRate);
  put_u32(out, kSampleRate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (auto s : samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

std::string to_hex(std::span<const unsigned char> digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (auto b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0x0F]);
  }
  return out;
}

bool is_hex_digest(std::string_view s) {
  return s.size() == 64 &&
         s.find_first_not_of("0123456789abcdef") == std::string_view::npos;
}

AudioBytes decode_base64(const std::string& text) {
  AudioBytes out(3 * ((text.size() + 3) / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0 || text.size() % 4 != 0) throw Error("BackendRejected", "malformed base64 audio");
  std::size_t padding = 0;
  for (auto it = text.rbegin(); it != text.rend() && *it == '='; ++it) ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

}  // namespace

void check_request(const SynthesisRequest& req) {
  if (req.text.empty()) throw InvalidRequest("text must not be empty");
  if (const auto n = utf8_length(req.text); n > kMaxLineChars) throw TextTooLong(n);
  if (!is_valid_utf8(req.text)) throw InvalidRequest("text is not valid UTF-8");
  if (req.format != kAudioFormat) throw InvalidRequest("unsupported audio format " + req.format);
}

std::string content_hash(const SynthesisRequest& req, std::string_view backend_id) {
  std::string material = "voice=" + std::to_string(req.voice.value()) + "\nformat=" + req.format +
                         "\nbackend=" + std::string(backend_id) + "\ntext=" + req.text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("HashFailure", "SHA-256 digest failed");
  }
  return to_hex({digest, len});
}

std::optional<WavInfo> parse_wav_header(std::span<const std::uint8_t> b) {
  auto tag = [&](std::size_t at, const char* t) {
    return b.size() >= at + 4 && std::equal(t, t + 4, b.begin() + static_cast<std::ptrdiff_t>(at));
  };
  if (!tag(0, "RIFF") || !tag(8, "WAVE")) return std::nullopt;

  WavInfo info;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const auto size = get_u32(b, at + 4);
    const auto body = at + 8;
    if (tag(at, "fmt ")) {
      if (size < 16 || body + 16 > b.size()) return std::nullopt;
      if (get_u16(b, body) != 1) return std::nullopt;  // PCM only
      info.channels = get_u16(b, body + 2);
      info.sample_rate = static_cast<int>(get_u32(b, body + 4));
      info.bits_per_sample = get_u16(b, body + 14);
      have_fmt = true;
    } else if (tag(at, "data")) {
      if (!have_fmt) return std::nullopt;
      info.data_bytes = std::min<std::size_t>(size, b.size() - body);
      return info;
    }
    at = body + size + (size & 1);
  }
  return std::nullopt;
}

std::optional<std::int64_t> wav_duration_ms(std::span<const std::uint8_t> bytes) {
  auto info = parse_wav_header(bytes);
  if (!info || info->channels <= 0 || info->sample_rate <= 0 || info->bits_per_sample <= 0) {
    return std::nullopt;
  }
  const auto frame_bytes = static_cast<std::int64_t>(info->channels) * info->bits_per_sample / 8;
  const auto frames = static_cast<std::int64_t>(info->data_bytes) / frame_bytes;
  return (frames * 1000 + info->sample_rate / 2) / info->sample_rate;
}

std::int64_t MockBackend::duration_ms(std::string_view text) noexcept {
  return std::max<std::int64_t>(300, 80 * static_cast<std::int64_t>(utf8_length(text)));
}

AudioBytes MockBackend::synthesize(const SynthesisRequest& req, const VoiceProfile&) {
  const auto count = static_cast<std::size_t>(duration_ms(req.text) * kSampleRate / 1000);
  const double step = 2.0 * std::numbers::pi * frequency_hz(req.voice) / kSampleRate;
  std::vector<std::int16_t> samples(count);
  for (std::size_t n = 0; n < count; ++n) {
    samples[n] = static_cast<std::int16_t>(std::lround(0.5 * 32767.0 * std::sin(step * static_cast<double>(n))));
  }
  return pcm16_wav(samples);
}

RemoteBackend::RemoteBackend(std::string id, RemoteTransport transport, RetryPolicy policy,
                             Sleeper sleep)
    : id_(std::move(id)),
      transport_(std::move(transport)),
      policy_(policy),
      sleep_(sleep ? std::move(sleep) : Sleeper([](auto d) { std::this_thread::sleep_for(d); })) {}

AudioBytes RemoteBackend::synthesize(const SynthesisRequest& req, const VoiceProfile& voice) {
  auto delay = policy_.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return transport_(req, voice);
    } catch (const BackendUnavailable&) {
      if (attempt >= policy_.attempts) throw;
    }
    sleep_(delay);
    delay *= 2;
  }
}

RemoteTransport cloud_tts_transport(std::string api_key, std::string endpoint) {
  return [api_key = std::move(api_key), endpoint = std::move(endpoint)](
             const SynthesisRequest& req, const VoiceProfile& voice) -> AudioBytes {
    auto param = [&](const char* key, const char* fallback) {
      auto it = voice.synthesis_params.find(key);
      return it == voice.synthesis_params.end() ? std::string(fallback) : it->second;
    };
    nlohmann::json body = {
        {"input", {{"text", req.text}}},
        {"voice", {{"languageCode", "en-US"}, {"name", param("voice_name", "en-US-Standard-A")}}},
        {"audioConfig",
         {{"audioEncoding", "LINEAR16"},
          {"sampleRateHertz", kSampleRate},
          {"pitch", std::stod(param("pitch", "0"))},
          {"speakingRate", std::stod(param("speaking_rate", "1"))}}},
    };

    httplib::Client client(endpoint);
    client.set_connection_timeout(5);
    client.set_read_timeout(20);
    auto res = client.Post("/v1/text:synthesize?key=" + api_key, body.dump(), "application/json");
    if (!res) {
      throw BackendUnavailable("cannot reach " + endpoint + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
      throw BackendUnavailable("synthesis service returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error("BackendRejected",
                  "synthesis service returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    const auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("audioContent") ||
        !reply["audioContent"].is_string()) {
      throw Error("BackendRejected", "synthesis reply has no audioContent");
    }
    auto wav = decode_base64(reply["audioContent"].get<std::string>());
    const auto info = parse_wav_header(wav);
    if (!info || info->channels != 1 || info->sample_rate != kSampleRate ||
        info->bits_per_sample != 16) {
      throw Error("BackendRejected", "synthesis reply is not " + std::string(kAudioFormat));
    }
    return wav;
  };
}

AudioCache::AudioCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
  const auto index_path = root_ / "index.tsv";
  if (!std::filesystem::exists(index_path)) return;
  std::istringstream in(detail::read_file(index_path));
  std::string hash;
  IndexEntry e{};
  for (std::string row; std::getline(in, row);) {
    std::istringstream fields(row);
    if (fields >> hash >> e.voice >> e.bytes >> e.duration_ms && is_hex_digest(hash)) {
      index_[hash] = e;
    }
  }
}

std::filesystem::path AudioCache::path_for(const std::string& hash) const {
  return root_ / hash.substr(0, 2) / (hash + ".wav");
}

std::optional<AudioAsset> AudioCache::find(const std::string& hash) const {
  IndexEntry entry{};
  {
    std::lock_guard lock(mutex_);
    auto it = index_.find(hash);
    if (it == index_.end()) return std::nullopt;
    entry = it->second;
  }
  std::string raw;
  try {
    raw = detail::read_file(path_for(hash));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (raw.size() != entry.bytes) return std::nullopt;
  return AudioAsset{hash, AudioBytes(raw.begin(), raw.end()), entry.duration_ms};
}

void AudioCache::store(const AudioAsset& asset, VoiceId voice) {
  detail::write_file_atomic(path_for(asset.content_hash),
                            {reinterpret_cast<const char*>(asset.bytes.data()), asset.bytes.size()});
  std::lock_guard lock(mutex_);
  index_[asset.content_hash] = IndexEntry{voice.value(), asset.bytes.size(), asset.duration_ms};
  std::ostringstream out;
  for (const auto& [hash, e] : index_) {
    out << hash << '\t' << e.voice << '\t' << e.bytes << '\t' << e.duration_ms << '\n';
  }
  detail::write_file_atomic(root_ / "index.tsv", out.str());
}

std::size_t AudioCache::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

TtsGateway::TtsGateway(std::unique_ptr<SynthesisBackend> backend, std::filesystem::path cache_root)
    : backend_(std::move(backend)), cache_(std::move(cache_root)) {}

AudioAsset TtsGateway::synthesize(const SynthesisRequest& req) {
  check_request(req);
  const auto hash = content_hash(req, backend_->id());

  std::promise<AudioAsset> promise;
  std::shared_future<AudioAsset> pending;
  {
    // The leader stores into the cache before leaving inflight_, so checking
    // both under this lock never misses a finished clip.
    std::lock_guard lock(inflight_mutex_);
    if (auto hit = cache_.find(hash)) return *hit;
    if (auto it = inflight_.find(hash); it != inflight_.end()) {
      pending = it->second;
    } else {
      inflight_.emplace(hash, promise.get_future().share());
    }
  }
  if (pending.valid()) return pending.get();

  try {
    promise.set_value(synthesize_uncached(req, hash));
  } catch (...) {
    promise.set_exception(std::current_exception());
  }
  std::shared_future<AudioAsset> done;
  {
    std::lock_guard lock(inflight_mutex_);
    done = inflight_.at(hash);
    inflight_.erase(hash);
  }
  return done.get();
}

AudioAsset TtsGateway::synthesize_uncached(const SynthesisRequest& req, const std::string& hash) {
  ++backend_calls_;
  auto bytes = backend_->synthesize(req, voice_profile(req.voice));
  const auto duration = wav_duration_ms(bytes);
  if (!duration || *duration <= 0) {
    throw Error("BackendRejected", "backend returned audio without a usable WAV header");
  }
  AudioAsset asset{hash, std::move(bytes), *duration};
  cache_.store(asset, req.voice);
  return asset;
}

}  // namespace storycast
