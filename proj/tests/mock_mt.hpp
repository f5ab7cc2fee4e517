#pragma once

// Loopback machine-translation server speaking the generic JSON contract.

#include <httplib.h>

#include <atomic>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace xling::testing {

class MockMtServer {
 public:
  using Transform = std::function<std::string(const std::string&)>;

  explicit MockMtServer(Transform transform = [](const std::string& s) { return s; })
      : transform_(std::move(transform)) {
    server_.Post("/translate", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests_;
      {
        std::lock_guard lock(mutex_);
        authorizations_.push_back(req.get_header_value("Authorization"));
      }
      if (n <= fail_first_) {
        res.status = fail_status_;
        res.set_content("{\"error\":\"busy\"}", "application/json");
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& q : body.at("q")) out.push_back(transform_(q.get<std::string>()));
      if (drop_one_ && !out.empty()) out.erase(out.size() - 1);
      {
        std::lock_guard lock(mutex_);
        batches_.push_back(body.at("q").size());
      }
      res.set_content(malformed_ ? std::string("{not json") : nlohmann::json{{"translations", out}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockMtServer() {
    server_.stop();
    thread_.join();
  }

  MockMtServer(const MockMtServer&) = delete;
  MockMtServer& operator=(const MockMtServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/translate"; }
  int requests() const { return requests_; }
  std::vector<std::size_t> batches() const {
    std::lock_guard lock(mutex_);
    return batches_;
  }
  std::vector<std::string> authorizations() const {
    std::lock_guard lock(mutex_);
    return authorizations_;
  }

  /// The first `n` requests answer with `status`.
  void fail_first(int n, int status = 503) {
    fail_first_ = n;
    fail_status_ = status;
  }
  void set_malformed(bool on) { malformed_ = on; }
  void set_drop_one(bool on) { drop_one_ = on; }

 private:
  Transform transform_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> fail_first_{0};
  std::atomic<int> fail_status_{503};
  std::atomic<bool> malformed_{false};
  std::atomic<bool> drop_one_{false};
  mutable std::mutex mutex_;
  std::vector<std::size_t> batches_;
  std::vector<std::string> authorizations_;
};

}  // namespace xling::testing
