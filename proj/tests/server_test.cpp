#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "proofpad/server.hpp"
#include "test_support.hpp"

namespace proofpad {
namespace {

/// Blocking framed client for the socket protocol.
class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw std::runtime_error("connect failed");
    timeval tv{5, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }
  ~Client() { ::close(fd_); }

  void send_raw(std::string_view bytes) { ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL); }
  void send(const json& msg) { send_raw(encode_frame(msg.dump())); }

  /// Next message, or null on EOF or timeout.
  json receive() {
    while (true) {
      if (auto payload = decoder_.next()) return json::parse(*payload);
      char buf[4096];
      ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n <= 0) return nullptr;
      decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
  }

  /// Messages up to and including the reply.
  std::vector<json> until_reply() {
    std::vector<json> out;
    while (true) {
      json m = receive();
      if (m.is_null()) return out;
      out.push_back(m);
      if (m["type"] == "reply") return out;
    }
  }

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

Controller fake_controller() {
  return Controller([] { return fake_backend(); });
}

TEST(Frames, DecoderIsChunkingInvariant) {
  std::mt19937_64 rng(5);
  std::vector<std::string> payloads = {"{}", "", R"j({"kind":"open","text":"(defun f (x)\r\n\r\n x)"})j", std::string(3000, 'x')};
  std::string stream;
  for (const auto& p : payloads) stream += encode_frame(p);
  stream += "content-length: 2\r\nX-Other: y\r\n\r\n[]";
  payloads.push_back("[]");
  for (int trial = 0; trial < 500; ++trial) {
    FrameDecoder d;
    std::vector<std::string> got;
    std::size_t at = 0;
    while (at < stream.size()) {
      std::size_t n = 1 + rng() % 40;
      d.feed(std::string_view(stream).substr(at, n));
      at += n;
      while (auto p = d.next()) got.push_back(*p);
    }
    ASSERT_EQ(got, payloads);
  }
}

TEST(Frames, BadHeadersAreMalformedRequests) {
  for (const char* bad : {"Content-Length: x\r\n\r\n", "Content-Type: a\r\n\r\n{}", "garbage\r\n\r\n"}) {
    FrameDecoder d;
    d.feed(bad);
    try {
      d.next();
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedRequest);
    }
  }
}

TEST(Server, ConnectSendsSnapshotAndAnswersRequests) {
  Controller c = fake_controller();
  Server server(c, ServerConfig{});
  server.start();
  Client client(server.port());
  json snap = client.receive();
  EXPECT_EQ(snap["kind"], "snapshot");
  EXPECT_EQ(snap["document"], nullptr);

  client.send({{"id", 1}, {"kind", "open"}, {"text", "(defun f (x) x)\n(defun g (x) (f x))\n"}});
  auto msgs = client.until_reply();
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0]["kind"], "snapshot");
  EXPECT_EQ(msgs[1]["id"], 1);

  client.send({{"id", 2}, {"kind", "admit-through"}, {"index", 1}});
  msgs = client.until_reply();
  EXPECT_EQ(msgs.back()["result"]["statuses"], "AA");

  client.send_raw(encode_frame("{oops"));
  msgs = client.until_reply();
  EXPECT_EQ(msgs.back()["error"]["code"], "malformed-request");
  EXPECT_EQ(msgs.back()["id"], nullptr);
  server.stop();
}

TEST(Server, SecondClientIsRejectedWhileFirstHoldsTheDocument) {
  Controller c = fake_controller();
  Server server(c, ServerConfig{});
  server.start();
  {
    Client first(server.port());
    EXPECT_EQ(first.receive()["kind"], "snapshot");
    Client second(server.port());
    json m = second.receive();
    EXPECT_EQ(m["type"], "rejected");
    EXPECT_EQ(m["error"]["code"], "document-busy");
    EXPECT_TRUE(second.receive().is_null());
    // The first client is unaffected.
    first.send({{"id", 9}, {"kind", "lint"}});
    EXPECT_EQ(first.until_reply().back()["error"]["code"], "no-document");
  }
  // Once the owner leaves, a new client is accepted.
  for (int attempt = 0; attempt < 50; ++attempt) {
    Client next(server.port());
    json m = next.receive();
    if (m["type"] == "event") {
      EXPECT_EQ(m["kind"], "snapshot");
      server.stop();
      return;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ADD_FAILURE() << "owner slot was never released";
}

TEST(Server, PortInUse) {
  Controller c = fake_controller();
  Server first(c, ServerConfig{});
  try {
    Server second(c, ServerConfig{first.port()});
    ADD_FAILURE() << "bound a busy port";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PortInUse);
  }
}

TEST(Server, DebouncedDiagnosticsArePushed) {
  Controller c(
      [] { return fake_backend(); },
      ControllerConfig{std::chrono::milliseconds(50), [] { return std::chrono::steady_clock::now(); }, {}, 100});
  Server server(c, ServerConfig{0, std::nullopt, 0, std::chrono::milliseconds(10)});
  server.start();
  Client client(server.port());
  client.receive();
  client.send({{"id", 1}, {"kind", "open"}, {"text", "(cons 1)\n"}});
  client.until_reply();
  json m = client.receive();
  EXPECT_EQ(m["kind"], "diagnostics");
  EXPECT_EQ(m["items"][0]["code"], "arity-mismatch");
  server.stop();
}

TEST(Server, StaticAssetsAndHttpBridge) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("proofpad-static-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "index.html") << "<!doctype html><title>proof pad</title>\n";
  Controller c = fake_controller();
  Server server(c, ServerConfig{0, dir.string()});
  server.start();
  httplib::Client http("127.0.0.1", server.http_port());
  auto page = http.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, "<!doctype html><title>proof pad</title>\n");

  auto res = http.Post("/api/request", R"({"id":1,"kind":"open","text":"(defun f (x) x)\n"})", "application/json");
  ASSERT_TRUE(res);
  json msgs = json::parse(res->body);
  EXPECT_EQ(msgs.back()["ok"], true);
  auto events = http.Get("/api/events?after=0");
  ASSERT_TRUE(events);
  EXPECT_EQ(json::parse(events->body)[0]["kind"], "snapshot");
  {
    Client owner(server.port());
    owner.receive();
    auto busy = http.Post("/api/request", R"({"id":2,"kind":"lint"})", "application/json");
    ASSERT_TRUE(busy);
    EXPECT_EQ(busy->status, 409);
    EXPECT_EQ(json::parse(busy->body)["error"]["code"], "document-busy");
  }
  server.stop();
  fs::remove_all(dir);
}

}  // namespace
}  // namespace proofpad
