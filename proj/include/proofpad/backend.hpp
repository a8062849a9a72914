#pragma once

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "proofpad/error.hpp"
#include "proofpad/fake_acl2.hpp"
#include "proofpad/output.hpp"
#include "proofpad/sexp.hpp"

extern char** environ;

namespace proofpad {

using Millis = std::chrono::milliseconds;

struct BackendConfig {
  std::string executable;
  std::vector<std::string> arguments;
  std::string prompt_pattern = "ACL2 !?>";
  Millis startup_timeout{30'000};
  Millis form_timeout{120'000};
};

enum class Outcome { Success, Failure, Timeout, Crashed };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Failure: return "failure";
    case Outcome::Timeout: return "timeout";
    case Outcome::Crashed: return "crashed";
  }
  return "failure";
}

struct Submission {
  std::string form;
  std::uint64_t sentinel_id = 0;
  std::string result;  // bytes the backend wrote before the sentinel line
  Outcome outcome = Outcome::Success;

  friend bool operator==(const Submission&, const Submission&) = default;
};

struct ReadResult {
  enum class Status { Data, Timeout, Eof };
  Status status = Status::Timeout;
  std::string bytes;
};

/// Byte pipe to an ACL2-like process.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void write(std::string_view bytes) = 0;
  /// Blocks for at most `timeout` waiting for output.
  virtual ReadResult read(Millis timeout) = 0;
  virtual void kill() = 0;
};

/// Splits pending output into read-sized chunks: given the number of bytes
/// available, returns how many the next read delivers (at least 1).
using Chunker = std::function<std::size_t(std::size_t available)>;

/// In-memory transport over a FakeAcl2. Reads never block: with nothing
/// pending they report Timeout (or Eof once the fake has crashed).
class FakeTransport : public Transport {
 public:
  explicit FakeTransport(std::shared_ptr<FakeAcl2> fake, Chunker chunker = {})
      : fake_(std::move(fake)), chunker_(std::move(chunker)) {
    pending_ = fake_->banner();
  }

  void write(std::string_view bytes) override {
    if (killed_) return;
    pending_ += fake_->feed(bytes);
  }

  ReadResult read(Millis) override {
    if (killed_) return {ReadResult::Status::Eof, {}};
    if (pending_.empty()) {
      return {fake_->crashed() ? ReadResult::Status::Eof : ReadResult::Status::Timeout, {}};
    }
    std::size_t n = chunker_ ? std::clamp<std::size_t>(chunker_(pending_.size()), 1, pending_.size()) : pending_.size();
    ReadResult r{ReadResult::Status::Data, pending_.substr(0, n)};
    pending_.erase(0, n);
    return r;
  }

  void kill() override { killed_ = true; }

 private:
  std::shared_ptr<FakeAcl2> fake_;
  Chunker chunker_;
  std::string pending_;
  bool killed_ = false;
};

/// Replays canned output: every write appends the responder's reply.
class ScriptedTransport : public Transport {
 public:
  using Responder = std::function<std::string(std::string_view input)>;

  ScriptedTransport(std::string greeting, Responder responder, Chunker chunker = {})
      : pending_(std::move(greeting)), responder_(std::move(responder)), chunker_(std::move(chunker)) {}

  void write(std::string_view bytes) override { pending_ += responder_(bytes); }

  ReadResult read(Millis) override {
    if (pending_.empty()) return {ReadResult::Status::Timeout, {}};
    std::size_t n = chunker_ ? std::clamp<std::size_t>(chunker_(pending_.size()), 1, pending_.size()) : pending_.size();
    ReadResult r{ReadResult::Status::Data, pending_.substr(0, n)};
    pending_.erase(0, n);
    return r;
  }

  void kill() override {}

 private:
  std::string pending_;
  Responder responder_;
  Chunker chunker_;
};

/// A child process with stdin/stdout pipes (stderr joins stdout). A reader
/// thread moves output into a queue.
class ProcessTransport : public Transport {
 public:
  explicit ProcessTransport(const BackendConfig& config) {
    ::signal(SIGPIPE, SIG_IGN);
    if (config.executable.empty() || ::access(config.executable.c_str(), X_OK) != 0) {
      throw Error(ErrorCode::SpawnFailure, "cannot execute '" + config.executable + "'");
    }
    int in[2], out[2];
    if (::pipe2(in, O_CLOEXEC) != 0 || ::pipe2(out, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::SpawnFailure, std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in[0], 0);
    posix_spawn_file_actions_adddup2(&actions, out[1], 1);
    posix_spawn_file_actions_adddup2(&actions, out[1], 2);
    std::vector<std::string> argv_store{config.executable};
    argv_store.insert(argv_store.end(), config.arguments.begin(), config.arguments.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);
    int rc = ::posix_spawn(&pid_, config.executable.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in[0]);
    ::close(out[1]);
    if (rc != 0) {
      ::close(in[1]);
      ::close(out[0]);
      throw Error(ErrorCode::SpawnFailure, "spawn '" + config.executable + "': " + std::strerror(rc));
    }
    stdin_ = in[1];
    stdout_ = out[0];
    reader_ = std::thread([this] { pump(); });
  }

  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  ~ProcessTransport() override {
    kill();
    if (reader_.joinable()) reader_.join();
    if (stdout_ >= 0) ::close(stdout_);
  }

  void write(std::string_view bytes) override {
    while (!bytes.empty() && stdin_ >= 0) {
      ssize_t n = ::write(stdin_, bytes.data(), bytes.size());
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return;  // the reader will observe Eof
      bytes.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  ReadResult read(Millis timeout) override {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [this] { return !queue_.empty() || eof_; });
    if (!queue_.empty()) {
      std::string bytes;
      while (!queue_.empty()) {
        bytes += queue_.front();
        queue_.pop_front();
      }
      return {ReadResult::Status::Data, std::move(bytes)};
    }
    return {eof_ ? ReadResult::Status::Eof : ReadResult::Status::Timeout, {}};
  }

  void kill() override {
    if (stdin_ >= 0) {
      ::close(stdin_);
      stdin_ = -1;
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int stdin_ = -1;
  int stdout_ = -1;
  std::thread reader_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool eof_ = false;

  void pump() {
    char buf[4096];
    while (true) {
      ssize_t n = ::read(stdout_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      std::lock_guard lock(mutex_);
      if (n <= 0) {
        eof_ = true;
        cv_.notify_all();
        return;
      }
      queue_.emplace_back(buf, static_cast<std::size_t>(n));
      cv_.notify_all();
    }
  }
};

inline constexpr std::string_view kSentinelPrefix = "PROOFPAD-SENTINEL-";

inline std::string sentinel_command(std::uint64_t id) {
  return "(cw \"~%" + std::string(kSentinelPrefix) + std::to_string(id) + "~%\")";
}

/// World-changing events a form contributes once admitted: 0 for
/// expressions, the sum over its body for progn, 1 for any other event.
inline std::size_t event_units(const Node& tree, const BuiltinTable& table = BuiltinTable::standard()) {
  std::string head = tree.head();
  if (head.empty() || form_kind_for_head(head, table) != FormKind::Event) return 0;
  if (head != "progn") return 1;
  std::size_t n = 0;
  for (std::size_t i = 1; i < tree.children.size(); ++i) n += event_units(tree.children[i], table);
  return n;
}

inline std::size_t event_units(std::string_view form_text) {
  auto forms = parse_source(form_text);
  return forms.empty() ? 0 : event_units(forms.front().tree);
}

/// Sentinel-scanning driver. Submissions are serialized by an internal lock;
/// a timeout or crash poisons the handle and later calls throw.
class Backend {
 public:
  Backend(std::unique_ptr<Transport> transport, BackendConfig config, std::shared_ptr<FakeAcl2> fake = nullptr)
      : transport_(std::move(transport)), config_(std::move(config)), prompt_(config_.prompt_pattern),
        fake_(std::move(fake)) {
    if (config_.startup_timeout.count() <= 0 || config_.form_timeout.count() <= 0) {
      throw Error(ErrorCode::PreconditionViolation, "backend timeouts must be positive");
    }
    auto deadline = Clock::now() + config_.startup_timeout;
    std::smatch m;
    while (!std::regex_search(buffer_, m, prompt_)) {
      auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
      if (left.count() <= 0) {
        transport_->kill();
        throw Error(ErrorCode::StartupTimeout, "no prompt within " + std::to_string(config_.startup_timeout.count()) + " ms");
      }
      ReadResult r = transport_->read(left);
      if (r.status == ReadResult::Status::Eof) {
        throw Error(ErrorCode::SpawnFailure, "backend exited during startup: " + buffer_);
      }
      if (r.status == ReadResult::Status::Timeout && fake_) {
        transport_->kill();
        throw Error(ErrorCode::StartupTimeout, "no prompt from the fake backend");
      }
      buffer_ += r.bytes;
    }
    banner_ = buffer_.substr(0, static_cast<std::size_t>(m.position(0) + m.length(0)));
    buffer_.erase(0, banner_.size());
  }

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  ~Backend() {
    if (transport_) transport_->kill();
  }

  /// Sends one form followed by a sentinel print and collects its output.
  Submission submit(std::string_view form) {
    std::lock_guard lock(mutex_);
    Submission s = exchange(std::string(form));
    if (s.outcome == Outcome::Success) {
      if (std::size_t units = event_units(form); units > 0) commands_.push_back(units);
    }
    return s;
  }

  /// Rolls back the last `count` events (not commands). `count` must end on
  /// a command boundary of the admitted history.
  Submission undo_through(std::size_t count) {
    std::lock_guard lock(mutex_);
    if (count == 0) throw Error(ErrorCode::PreconditionViolation, "undo count must be positive");
    std::size_t sum = 0, k = 0;
    while (sum < count && k < commands_.size()) sum += commands_[commands_.size() - 1 - k++];
    if (sum != count) {
      throw Error(ErrorCode::PreconditionViolation,
                  "cannot undo " + std::to_string(count) + " events; " + std::to_string(admitted_events_locked()) +
                      " admitted");
    }
    std::string cmd = k == 1 ? "(ubt! :x)" : "(ubt! :x-" + std::to_string(k - 1) + ")";
    Submission s = exchange(cmd);
    if (s.outcome == Outcome::Success) commands_.resize(commands_.size() - k);
    return s;
  }

  bool poisoned() const {
    std::lock_guard lock(mutex_);
    return poisoned_;
  }

  std::size_t admitted_events() const {
    std::lock_guard lock(mutex_);
    return admitted_events_locked();
  }

  const std::string& banner() const noexcept { return banner_; }
  const BackendConfig& config() const noexcept { return config_; }

  /// The in-process fake behind this handle, if any.
  FakeAcl2* fake() const noexcept { return fake_.get(); }

 private:
  using Clock = std::chrono::steady_clock;

  std::unique_ptr<Transport> transport_;
  BackendConfig config_;
  std::regex prompt_;
  std::shared_ptr<FakeAcl2> fake_;
  mutable std::mutex mutex_;
  std::string buffer_;
  std::string banner_;
  std::uint64_t next_id_ = 0;
  std::vector<std::size_t> commands_;  // event units per admitted command
  bool poisoned_ = false;

  std::size_t admitted_events_locked() const {
    std::size_t n = 0;
    for (auto c : commands_) n += c;
    return n;
  }

  /// Position of the sentinel line for `id` followed by a prompt, as
  /// (sentinel line start, end of the prompt).
  std::optional<std::pair<std::size_t, std::size_t>> find_completion(const std::string& line) const {
    std::size_t from = 0;
    while (true) {
      std::size_t at = buffer_.find(line, from);
      if (at == std::string::npos) return std::nullopt;
      from = at + 1;
      if (at != 0 && buffer_[at - 1] != '\n') continue;
      std::size_t after = at + line.size();
      if (after < buffer_.size() && buffer_[after] == '\r') ++after;
      if (after >= buffer_.size()) return std::nullopt;  // line not finished yet
      if (buffer_[after] != '\n') continue;
      std::smatch m;
      auto begin = buffer_.cbegin() + static_cast<std::ptrdiff_t>(after + 1);
      if (!std::regex_search(begin, buffer_.cend(), m, prompt_)) return std::nullopt;
      return std::make_pair(at, after + 1 + static_cast<std::size_t>(m.position(0) + m.length(0)));
    }
  }

  Submission exchange(std::string form) {
    if (poisoned_) throw Error(ErrorCode::BackendPoisoned, "backend handle must be restarted");
    Submission s;
    s.form = std::move(form);
    s.sentinel_id = ++next_id_;
    const std::string line = std::string(kSentinelPrefix) + std::to_string(s.sentinel_id);
    transport_->write(s.form + "\n" + sentinel_command(s.sentinel_id) + "\n");

    auto deadline = Clock::now() + config_.form_timeout;
    while (true) {
      if (auto done = find_completion(line)) {
        s.result = buffer_.substr(0, done->first);
        buffer_.erase(0, done->second);
        s.outcome = output_indicates_failure(s.result) ? Outcome::Failure : Outcome::Success;
        return s;
      }
      auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
      ReadResult r = left.count() > 0 ? transport_->read(left) : ReadResult{};
      if (r.status == ReadResult::Status::Data) {
        buffer_ += r.bytes;
        continue;
      }
      poisoned_ = true;
      transport_->kill();
      s.result = std::move(buffer_);
      buffer_.clear();
      s.outcome = r.status == ReadResult::Status::Eof ? Outcome::Crashed : Outcome::Timeout;
      return s;
    }
  }
};

/// Spawns a real ACL2 (or any compatible executable).
inline std::unique_ptr<Backend> start(const BackendConfig& config) {
  return std::make_unique<Backend>(std::make_unique<ProcessTransport>(config), config);
}

/// A hermetic in-process backend.
inline std::unique_ptr<Backend> fake_backend(Chunker chunker = {}, BackendConfig config = {}) {
  auto fake = std::make_shared<FakeAcl2>();
  return std::make_unique<Backend>(std::make_unique<FakeTransport>(fake, std::move(chunker)), std::move(config), fake);
}

}  // namespace proofpad
