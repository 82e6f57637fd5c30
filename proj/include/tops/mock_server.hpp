#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace tops {

// Mock chat-completion endpoint serving canned replies from a script file.
// Script layout: {"replies": [{"user": ..., "effort": "low|medium|high|"
// (empty = no system prompt), "seed": N, "text": ..., "finish_reason": ...,
// "reasoning_tokens"?, "completion_tokens"?, "fail_first"?, "fail_status"?},
// ...]}. fail_first makes the first N requests for that key answer with
// fail_status (default 429) before the canned reply is served.
//
// Requests are matched on (user content, effort class of the system message,
// seed). Unmatched requests return 404 so golden runs fail loudly. GET /hits
// reports how many completion requests the server has answered.
class MockChatServer {
 public:
  explicit MockChatServer(const std::filesystem::path& script_path, int delay_ms = 0);
  ~MockChatServer();

  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  // Binds to a free port on localhost and serves on a background thread.
  void start();
  void stop();

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  size_t hits() const { return hits_.load(); }
  // high-water mark of concurrently served completion requests
  size_t max_concurrent() const { return max_concurrent_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<size_t> hits_{0};
  std::atomic<size_t> in_flight_{0};
  std::atomic<size_t> max_concurrent_{0};
  int port_ = 0;
  int delay_ms_ = 0;
};

}  // namespace tops
