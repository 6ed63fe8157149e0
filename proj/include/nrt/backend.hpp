#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nrt/error.hpp"
#include "nrt/prompting.hpp"

namespace nrt {

class BackendError : public Error {
 public:
  using Error::Error;
};

enum class BackendKind { HttpChat, MockPerfect, MockEcho, MockGloss };

/// "http", "mock-perfect", "mock-echo", "mock-gloss".
std::string_view backend_name(BackendKind kind);
BackendKind parse_backend(std::string_view name);

inline constexpr std::string_view kDefaultChatPath = "/v1/chat/completions";

struct BackendConfig {
  BackendKind kind = BackendKind::MockGloss;
  /// scheme://host[:port][/path]; the path defaults to kDefaultChatPath.
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env = "XAI_API_KEY";
  std::chrono::duration<double> timeout{60.0};
  int max_retries = 3;
  double temperature = 0.0;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};

  /// Throws ConfigError. Does not look at the environment.
  void validate() const;
};

struct TranslationResponse {
  std::string candidate_raw;
  std::string candidate;
  std::chrono::duration<double> latency{0};
  int attempt_count = 0;
  bool from_cache = false;
};

/// Chat-completions request body: model, temperature, and a two-message
/// (system, user) conversation. A pure function of its arguments.
std::string request_body(const BackendConfig& config, const RenderedPrompt& prompt);

/// Content of the first choice's message. Throws BackendError when absent.
std::string parse_completion(std::string_view response_body);

/// Delay slept before retry k (k = 0 .. max_retries-1):
/// min(backoff_initial * 2^k, backoff_max).
std::vector<std::chrono::milliseconds> backoff_delays(const BackendConfig& config);

/// Hex SHA-256 over (kind, model, temperature, system message, user message).
std::string cache_key(const BackendConfig& config, const RenderedPrompt& prompt);

/// Source-token -> English mapping read back from the `<source> => <english>`
/// lines of a rendered system message. Only lines whose source and English
/// sides are each a single word contribute; the first mapping of a word wins.
std::map<std::string, std::string> induce_glossary(std::string_view system_message);

/// Word-by-word substitution of `source` through `glossary`; unknown words are
/// copied through. The first letter is capitalized and a period appended.
std::string gloss_translate(std::string_view source, const std::map<std::string, std::string>& glossary);

/// On-disk response cache, one JSON document per key: `<dir>/<key>.json`.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, std::string_view raw_response);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

/// Counting gate on concurrent requests. Records the highest concurrency seen.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t max_in_flight);

  void acquire();
  void release();
  std::size_t peak() const;

  class Slot {
   public:
    explicit Slot(InFlightLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
    ~Slot() { limiter_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& limiter_;
  };

 private:
  const std::size_t max_;
  std::size_t active_ = 0;
  std::size_t peak_ = 0;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
};

struct TranslatorOptions {
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
};

/// Sends each prompt as its own request. Thread-safe.
class Translator {
 public:
  /// For HttpChat, resolves the API key from the environment now and throws
  /// ConfigError if it is unset or empty.
  explicit Translator(BackendConfig config, TranslatorOptions options = {});

  /// `reference` is required by MockPerfect and ignored otherwise. Mock
  /// backends do no I/O and report zero latency; the cache is consulted for
  /// HttpChat only.
  TranslationResponse translate(const RenderedPrompt& prompt, std::optional<std::string_view> reference = {});

  const BackendConfig& config() const { return config_; }
  std::size_t peak_in_flight() const { return limiter_.peak(); }

 private:
  TranslationResponse translate_http(const RenderedPrompt& prompt);
  std::string post_with_retries(const RenderedPrompt& prompt, int& attempts);

  BackendConfig config_;
  std::string api_key_;
  std::string base_url_;
  std::string path_;
  InFlightLimiter limiter_;
  std::unique_ptr<ResponseCache> cache_;
};

/// One-shot convenience wrapper around Translator.
TranslationResponse translate(const BackendConfig& config, const RenderedPrompt& prompt,
                              std::optional<std::string_view> reference_for_mock = {});

}  // namespace nrt
