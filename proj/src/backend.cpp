#include "nrt/backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "nrt/hash.hpp"
#include "nrt/io.hpp"
#include "nrt/text.hpp"

namespace nrt {

using nlohmann::json;

std::string_view backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::HttpChat:
      return "http";
    case BackendKind::MockPerfect:
      return "mock-perfect";
    case BackendKind::MockEcho:
      return "mock-echo";
    case BackendKind::MockGloss:
      return "mock-gloss";
  }
  return "http";
}

BackendKind parse_backend(std::string_view name) {
  for (auto kind : {BackendKind::HttpChat, BackendKind::MockPerfect, BackendKind::MockEcho, BackendKind::MockGloss})
    if (backend_name(kind) == name) return kind;
  throw ConfigError("unknown backend '" + std::string(name) + "'");
}

void BackendConfig::validate() const {
  if (kind == BackendKind::HttpChat) {
    if (endpoint_url.empty()) throw ConfigError("http backend needs an endpoint URL");
    if (model_name.empty()) throw ConfigError("http backend needs a model name");
    if (api_key_env.empty()) throw ConfigError("http backend needs the name of an API key environment variable");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(timeout.count() > 0)) throw ConfigError("timeout must be positive");
  if (backoff_initial.count() < 0 || backoff_max < backoff_initial)
    throw ConfigError("backoff must satisfy 0 <= initial <= max");
}

std::string request_body(const BackendConfig& config, const RenderedPrompt& prompt) {
  json body = {
      {"model", config.model_name},
      {"temperature", config.temperature},
      {"messages",
       json::array({{{"role", "system"}, {"content", prompt.system_message}},
                    {{"role", "user"}, {"content", prompt.user_message}}})},
  };
  return body.dump();
}

std::string parse_completion(std::string_view response_body) {
  json body = json::parse(response_body, nullptr, false);
  if (body.is_discarded()) throw BackendError("response is not JSON");
  const json* content = nullptr;
  if (body.is_object() && body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const json& choice = body["choices"][0];
    if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content"))
      content = &choice["message"]["content"];
  }
  if (!content || !content->is_string()) throw BackendError("response has no choices[0].message.content string");
  return content->get<std::string>();
}

std::vector<std::chrono::milliseconds> backoff_delays(const BackendConfig& config) {
  std::vector<std::chrono::milliseconds> out;
  auto delay = config.backoff_initial;
  for (int k = 0; k < config.max_retries; ++k) {
    out.push_back(std::min(delay, config.backoff_max));
    if (delay < config.backoff_max) delay *= 2;
  }
  return out;
}

std::string cache_key(const BackendConfig& config, const RenderedPrompt& prompt) {
  json key = json::array({backend_name(config.kind), config.model_name, config.temperature, prompt.system_message,
                          prompt.user_message});
  return sha256_hex(key.dump());
}

namespace {

// Bare word for glossary purposes: trimmed of sentence punctuation.
std::string bare_word(std::string_view w) {
  while (!w.empty() && std::string_view(".,;:!?\"'").find(w.back()) != std::string_view::npos) w.remove_suffix(1);
  while (!w.empty() && std::string_view("\"'").find(w.front()) != std::string_view::npos) w.remove_prefix(1);
  return std::string(w);
}

}  // namespace

std::map<std::string, std::string> induce_glossary(std::string_view system_message) {
  std::map<std::string, std::string> glossary;
  constexpr std::string_view kArrow = " => ";
  std::size_t pos = 0;
  while (pos < system_message.size()) {
    std::size_t eol = system_message.find('\n', pos);
    if (eol == std::string_view::npos) eol = system_message.size();
    const std::string_view line = system_message.substr(pos, eol - pos);
    pos = eol + 1;
    const std::size_t arrow = line.find(kArrow);
    if (arrow == std::string_view::npos) continue;
    const auto src = text::split_whitespace(line.substr(0, arrow));
    const auto eng = text::split_whitespace(line.substr(arrow + kArrow.size()));
    if (src.size() != 1 || eng.size() != 1) continue;
    std::string english = bare_word(eng[0]);
    if (english.empty()) continue;
    glossary.try_emplace(std::string(src[0]), std::move(english));
  }
  return glossary;
}

std::string gloss_translate(std::string_view source, const std::map<std::string, std::string>& glossary) {
  std::string out;
  for (std::string_view word : text::split_whitespace(source)) {
    if (!out.empty()) out.push_back(' ');
    auto it = glossary.find(std::string(word));
    out += it != glossary.end() ? it->second : std::string(word);
  }
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  out.push_back('.');
  return out;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  std::string content;
  try {
    content = io::read_file(path);
  } catch (const IoError&) {
    return std::nullopt;
  }
  json doc = json::parse(content, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("key", "") != key || !doc.contains("response") ||
      !doc["response"].is_string())
    return std::nullopt;
  return doc["response"].get<std::string>();
}

void ResponseCache::store(const std::string& key, std::string_view raw_response) {
  json doc = {{"key", key}, {"response", std::string(raw_response)}};
  std::lock_guard lock(write_mutex_);
  io::write_file_atomic(dir_ / (key + ".json"), doc.dump(2) + "\n");
}

InFlightLimiter::InFlightLimiter(std::size_t max_in_flight) : max_(std::max<std::size_t>(1, max_in_flight)) {}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return active_ < max_; });
  ++active_;
  peak_ = std::max(peak_, active_);
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mutex_);
    --active_;
  }
  cv_.notify_one();
}

std::size_t InFlightLimiter::peak() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

namespace {

// Splits "scheme://host[:port][/path]" into the client base and request path.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme: " + scheme);
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos || path_start + 1 == url.size())
    return {url.substr(0, path_start), std::string(kDefaultChatPath)};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

Translator::Translator(BackendConfig config, TranslatorOptions options)
    : config_(std::move(config)), limiter_(options.max_in_flight) {
  config_.validate();
  if (config_.kind == BackendKind::HttpChat) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
    std::tie(base_url_, path_) = split_endpoint(config_.endpoint_url);
    if (options.cache_dir) cache_ = std::make_unique<ResponseCache>(*options.cache_dir);
  }
}

TranslationResponse Translator::translate(const RenderedPrompt& prompt, std::optional<std::string_view> reference) {
  TranslationResponse r;
  switch (config_.kind) {
    case BackendKind::HttpChat:
      return translate_http(prompt);
    case BackendKind::MockPerfect:
      if (!reference) throw BackendError("mock-perfect backend needs the reference translation");
      r.candidate_raw = std::string(*reference);
      break;
    case BackendKind::MockEcho:
      r.candidate_raw = prompt.target_source;
      break;
    case BackendKind::MockGloss:
      r.candidate_raw = gloss_translate(prompt.target_source, induce_glossary(prompt.system_message));
      break;
  }
  r.candidate = extract_candidate(r.candidate_raw);
  r.attempt_count = 1;
  return r;
}

TranslationResponse Translator::translate_http(const RenderedPrompt& prompt) {
  const auto start = std::chrono::steady_clock::now();
  TranslationResponse r;
  const std::string key = cache_ ? cache_key(config_, prompt) : std::string();
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      r.candidate_raw = std::move(*hit);
      r.candidate = extract_candidate(r.candidate_raw);
      r.from_cache = true;
      r.attempt_count = 0;
      r.latency = std::chrono::steady_clock::now() - start;
      return r;
    }
  }
  r.candidate_raw = post_with_retries(prompt, r.attempt_count);
  try {
    r.candidate = extract_candidate(r.candidate_raw);
  } catch (const PromptError& e) {
    throw BackendError(std::string("unusable completion: ") + e.what());
  }
  if (cache_) cache_->store(key, r.candidate_raw);
  r.latency = std::chrono::steady_clock::now() - start;
  return r;
}

std::string Translator::post_with_retries(const RenderedPrompt& prompt, int& attempts) {
  const std::string body = request_body(config_, prompt);
  const auto delays = backoff_delays(config_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout);
  std::string last_error;
  for (attempts = 1;; ++attempts) {
    {
      InFlightLimiter::Slot slot(limiter_);
      // Fresh client per request: no connection or session state is shared.
      httplib::Client client(base_url_);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      client.set_bearer_token_auth(api_key_);
      auto res = client.Post(path_, body, "application/json");
      if (!res) {
        last_error = "request failed: " + httplib::to_string(res.error());
      } else if (res->status >= 200 && res->status < 300) {
        return parse_completion(res->body);
      } else if (!transient_status(res->status)) {
        throw BackendError("HTTP " + std::to_string(res->status) + " from " + base_url_ + path_ + ": " +
                           res->body.substr(0, 200));
      } else {
        last_error = "HTTP " + std::to_string(res->status);
      }
    }
    if (attempts > config_.max_retries) break;
    std::this_thread::sleep_for(delays[static_cast<std::size_t>(attempts - 1)]);
  }
  throw BackendError(last_error + " (gave up after " + std::to_string(attempts) + " attempts)");
}

TranslationResponse translate(const BackendConfig& config, const RenderedPrompt& prompt,
                              std::optional<std::string_view> reference_for_mock) {
  Translator translator(config);
  return translator.translate(prompt, reference_for_mock);
}

}  // namespace nrt
