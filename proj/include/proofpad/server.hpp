#pragma once

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "httplib.h"
#include "proofpad/api.hpp"

namespace proofpad {

inline constexpr std::size_t kMaxHeaderBytes = 8 * 1024;
inline constexpr std::size_t kMaxFrameBytes = 64 * 1024 * 1024;

/// "Content-Length: N\r\n\r\n" followed by exactly N payload bytes.
inline std::string encode_frame(std::string_view payload) {
  return "Content-Length: " + std::to_string(payload.size()) + "\r\n\r\n" + std::string(payload);
}

/// Incremental frame reader; any chunking of the byte stream yields the same
/// payloads. Header names are case-insensitive and unknown headers ignored.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  /// The next complete payload, if buffered. Throws malformed-request on a
  /// header without a valid Content-Length.
  std::optional<std::string> next() {
    std::size_t end = buffer_.find("\r\n\r\n");
    if (end == std::string::npos) {
      if (buffer_.size() > kMaxHeaderBytes) throw Error(ErrorCode::MalformedRequest, "frame header too long");
      return std::nullopt;
    }
    std::optional<std::size_t> length;
    std::string_view headers(buffer_.data(), end);
    while (!headers.empty()) {
      std::size_t eol = headers.find("\r\n");
      std::string_view line = headers.substr(0, eol);
      headers = eol == std::string_view::npos ? std::string_view() : headers.substr(eol + 2);
      std::size_t colon = line.find(':');
      if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedRequest, "frame header line without a colon");
      if (ascii_lower(line.substr(0, colon)) != "content-length") continue;
      std::string_view v = line.substr(colon + 1);
      while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
      std::size_t n = 0;
      if (v.empty() || v.size() > 10) throw Error(ErrorCode::MalformedRequest, "bad Content-Length");
      for (char c : v) {
        if (c < '0' || c > '9') throw Error(ErrorCode::MalformedRequest, "bad Content-Length");
        n = n * 10 + static_cast<std::size_t>(c - '0');
      }
      length = n;
    }
    if (!length) throw Error(ErrorCode::MalformedRequest, "frame without Content-Length");
    if (*length > kMaxFrameBytes) throw Error(ErrorCode::MalformedRequest, "frame too large");
    if (buffer_.size() < end + 4 + *length) return std::nullopt;
    std::string payload = buffer_.substr(end + 4, *length);
    buffer_.erase(0, end + 4 + *length);
    return payload;
  }

 private:
  std::string buffer_;
};

struct ServerConfig {
  std::uint16_t port = 0;  // 0 picks a free port
  std::optional<std::string> static_dir;
  std::uint16_t http_port = 0;
  std::chrono::milliseconds poll_interval{100};
  std::size_t event_log_limit = 10000;
};

/// One controller behind a localhost socket. The first connected client owns
/// the document; others are told document-busy and closed. All controller
/// calls and client writes happen under one mutex.
class Server {
 public:
  Server(Controller& controller, ServerConfig config) : controller_(&controller), config_(std::move(config)) {
    listen_fd_ = bind_localhost(config_.port);
    port_ = local_port(listen_fd_);
    if (config_.static_dir) setup_http();
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  std::uint16_t port() const noexcept { return port_; }
  std::uint16_t http_port() const noexcept { return http_port_; }

  void start() {
    running_ = true;
    threads_.emplace_back([this, fd = listen_fd_] { accept_loop(fd); });
    threads_.emplace_back([this] { poll_loop(); });
    if (http_) threads_.emplace_back([this] { http_->listen_after_bind(); });
  }

  /// Blocks until stop() is called from another thread or a signal handler path.
  void wait() {
    std::unique_lock lock(stop_mutex_);
    stop_cv_.wait(lock, [this] { return !running_; });
  }

  void stop() {
    {
      std::lock_guard lock(stop_mutex_);
      if (!running_ && listen_fd_ < 0) return;
      running_ = false;
    }
    stop_cv_.notify_all();
    if (listen_fd_ >= 0) {
      ::shutdown(listen_fd_, SHUT_RDWR);
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
    {
      std::lock_guard lock(mutex_);
      if (client_fd_ >= 0) ::shutdown(client_fd_, SHUT_RDWR);
    }
    if (http_) http_->stop();
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
    threads_.clear();
    // The accept loop has exited, so no client thread can be added now.
    for (auto& t : client_threads_) {
      if (t.joinable()) t.join();
    }
    client_threads_.clear();
  }

 private:
  Controller* controller_;
  ServerConfig config_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::uint16_t http_port_ = 0;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<bool> running_{false};
  std::mutex stop_mutex_;
  std::condition_variable stop_cv_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;  // guards controller_, client_fd_, log_, client_threads_
  std::vector<std::thread> client_threads_;
  int client_fd_ = -1;
  std::deque<json> log_;

  static int bind_localhost(std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      int err = errno;
      ::close(fd);
      if (err == EADDRINUSE) throw Error(ErrorCode::PortInUse, "port " + std::to_string(port) + " is in use");
      throw Error(ErrorCode::IoError, std::string("bind: ") + std::strerror(err));
    }
    if (::listen(fd, 8) != 0) {
      int err = errno;
      ::close(fd);
      throw Error(ErrorCode::IoError, std::string("listen: ") + std::strerror(err));
    }
    return fd;
  }

  static std::uint16_t local_port(int fd) {
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
  }

  static bool send_all(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
      ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
  }

  /// Records events and forwards everything to the owning client. Caller holds mutex_.
  void deliver(const std::vector<json>& messages) {
    for (const auto& m : messages) {
      if (m.value("type", "") == "event") {
        log_.push_back(m);
        if (log_.size() > config_.event_log_limit) log_.pop_front();
      }
      if (client_fd_ >= 0) send_all(client_fd_, encode_frame(m.dump()));
    }
  }

  void accept_loop(int listen_fd) {
    while (running_) {
      int fd = ::accept4(listen_fd, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      std::lock_guard lock(mutex_);
      if (client_fd_ >= 0) {
        json rejected = {{"type", "rejected"},
                         {"error", api::error_json(Error(ErrorCode::DocumentBusy, "another client owns this document"))}};
        send_all(fd, encode_frame(rejected.dump()));
        ::close(fd);
        continue;
      }
      client_fd_ = fd;
      send_all(fd, encode_frame(controller_->snapshot().dump()));
      client_threads_.emplace_back([this, fd] { client_loop(fd); });
    }
  }

  void client_loop(int fd) {
    FrameDecoder decoder;
    char buf[65536];
    while (true) {
      ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      try {
        while (auto payload = decoder.next()) {
          std::lock_guard lock(mutex_);
          deliver(controller_->handle_text(*payload));
        }
      } catch (const Error& e) {
        // The stream cannot be resynchronized after a bad header.
        std::lock_guard lock(mutex_);
        send_all(fd, encode_frame(api::reply_error(nullptr, e).dump()));
        break;
      }
    }
    std::lock_guard lock(mutex_);
    ::close(fd);
    if (client_fd_ == fd) client_fd_ = -1;
  }

  void poll_loop() {
    std::unique_lock stop_lock(stop_mutex_);
    while (running_) {
      stop_cv_.wait_for(stop_lock, config_.poll_interval, [this] { return !running_; });
      if (!running_) break;
      std::lock_guard lock(mutex_);
      deliver(controller_->poll());
    }
  }

  /// Static assets for the browser UI plus a request bridge, since browsers
  /// cannot open raw sockets. The bridge refuses work while a socket client
  /// owns the document.
  void setup_http() {
    http_ = std::make_unique<httplib::Server>();
    if (!http_->set_mount_point("/", *config_.static_dir)) {
      throw Error(ErrorCode::IoError, "static directory " + *config_.static_dir + " does not exist");
    }
    auto busy = [this](httplib::Response& res) {
      if (client_fd_ < 0) return false;
      res.status = 409;
      res.set_content(json{{"type", "rejected"},
                           {"error", api::error_json(Error(ErrorCode::DocumentBusy, "another client owns this document"))}}
                          .dump(),
                      "application/json");
      return true;
    };
    http_->Get("/api/snapshot", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      res.set_content(controller_->snapshot().dump(), "application/json");
    });
    http_->Post("/api/request", [this, busy](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      if (busy(res)) return;
      auto messages = controller_->handle_text(req.body);
      deliver(messages);
      res.set_content(json(messages).dump(), "application/json");
    });
    http_->Get("/api/events", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t after = req.has_param("after") ? std::stoull(req.get_param_value("after")) : 0;
      std::lock_guard lock(mutex_);
      json out = json::array();
      for (const auto& e : log_) {
        if (e["seq"].get<std::uint64_t>() > after) out.push_back(e);
      }
      res.set_content(out.dump(), "application/json");
    });
    if (config_.http_port == 0) {
      int bound = http_->bind_to_any_port("127.0.0.1");
      if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind an http port");
      http_port_ = static_cast<std::uint16_t>(bound);
    } else {
      if (!http_->bind_to_port("127.0.0.1", config_.http_port)) {
        throw Error(ErrorCode::PortInUse, "http port " + std::to_string(config_.http_port) + " is in use");
      }
      http_port_ = config_.http_port;
    }
  }
};

}  // namespace proofpad
