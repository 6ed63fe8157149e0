#pragma once

// Local chat-completions endpoint for backend tests.

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace nrt::testing {

inline std::string completion_body(const std::string& content) {
  return nlohmann::json{{"id", "stub"},
                        {"object", "chat.completion"},
                        {"choices", nlohmann::json::array({{{"index", 0},
                                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                                            {"finish_reason", "stop"}}})}}
      .dump();
}

class StubChatServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&, int call_index)>;

  explicit StubChatServer(Handler handler, std::string path = "/v1/chat/completions") : handler_(std::move(handler)) {
    server_.Post(path, [this](const httplib::Request& req, httplib::Response& res) {
      const int index = calls_++;
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(req.body);
        auth_headers_.push_back(req.get_header_value("Authorization"));
      }
      handler_(req, res, index);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int calls() const { return calls_.load(); }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mutex_);
    return auth_headers_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_headers_;
};

}  // namespace nrt::testing
