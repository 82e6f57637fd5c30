#include "tops/mock_server.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tops/effort.hpp"

namespace tops {

namespace {

using json = nlohmann::json;

// Effort class of an outbound system message: which built-in prompt it is.
std::string classify_system(const std::string& content) {
  for (Effort e : kAllEfforts) {
    if (content == system_prompt_for(e)) return std::string(effort_name(e));
  }
  return content.empty() ? "" : "custom";
}

}  // namespace

struct MockChatServer::Impl {
  httplib::Server server;
  std::thread thread;
  // (user, effort, seed) -> reply document
  std::map<std::tuple<std::string, std::string, long long>, json> replies;
  std::map<std::tuple<std::string, std::string, long long>, int> failures_left;
  std::mutex failures_mutex;
};

MockChatServer::MockChatServer(const std::filesystem::path& script_path, int delay_ms)
    : impl_(std::make_unique<Impl>()), delay_ms_(delay_ms) {
  std::ifstream in(script_path);
  if (!in) throw std::runtime_error("cannot open mock script: " + script_path.string());
  json script = json::parse(in);
  for (const json& r : script.at("replies")) {
    std::string user = r.at("user").get<std::string>();
    std::string effort = r.value("effort", "");
    long long seed = r.value("seed", 0LL);
    impl_->replies[{user, effort, seed}] = r;
    if (int fails = r.value("fail_first", 0); fails > 0) {
      impl_->failures_left[{user, effort, seed}] = fails;
    }
  }
}

MockChatServer::~MockChatServer() { stop(); }

void MockChatServer::start() {
  impl_->server.Post("/chat/completions", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    size_t now_in_flight = in_flight_.fetch_add(1) + 1;
    size_t seen = max_concurrent_.load();
    while (now_in_flight > seen && !max_concurrent_.compare_exchange_weak(seen, now_in_flight)) {
    }
    struct Departure {
      std::atomic<size_t>& counter;
      ~Departure() { counter.fetch_sub(1); }
    } departure{in_flight_};

    if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content("{\"error\":\"bad json\"}", "application/json");
      return;
    }
    hits_.fetch_add(1);

    std::string user, system;
    for (const json& m : body.value("messages", json::array())) {
      std::string role = m.value("role", "");
      if (role == "user") user = m.value("content", "");
      if (role == "system") system = m.value("content", "");
    }
    long long seed = body.value("seed", 0LL);
    std::string effort = classify_system(system);

    {
      std::lock_guard<std::mutex> lock(impl_->failures_mutex);
      auto fail_it = impl_->failures_left.find({user, effort, seed});
      if (fail_it != impl_->failures_left.end() && fail_it->second > 0) {
        --fail_it->second;
        int status = impl_->replies.at({user, effort, seed}).value("fail_status", 429);
        res.status = status;
        res.set_content("{\"error\":\"scripted failure\"}", "application/json");
        return;
      }
    }

    auto it = impl_->replies.find({user, effort, seed});
    if (it == impl_->replies.end()) {
      res.status = 404;
      json err = {{"error", "no scripted reply"},
                  {"user", user},
                  {"effort", effort},
                  {"seed", seed}};
      res.set_content(err.dump(), "application/json");
      return;
    }

    const json& reply = it->second;
    json message = {{"role", "assistant"}, {"content", reply.at("text").get<std::string>()}};
    json choice = {{"index", 0},
                   {"message", message},
                   {"finish_reason", reply.value("finish_reason", "stop")}};
    json out = {{"id", "mock"},
                {"object", "chat.completion"},
                {"model", body.value("model", "mock")},
                {"choices", json::array({choice})}};
    if (reply.contains("completion_tokens")) {
      json usage = {{"completion_tokens", reply.at("completion_tokens")}};
      if (reply.contains("reasoning_tokens")) {
        usage["reasoning_tokens"] = reply.at("reasoning_tokens");
      }
      out["usage"] = usage;
    }
    res.set_content(out.dump(), "application/json");
  });

  impl_->server.Get("/hits", [this](const httplib::Request&, httplib::Response& res) {
    json out = {{"hits", hits_.load()}};
    res.set_content(out.dump(), "application/json");
  });

  port_ = impl_->server.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("mock server could not bind a port");
  impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockChatServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tops
