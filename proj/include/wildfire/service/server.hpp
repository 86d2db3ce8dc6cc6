#pragma once

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wildfire/service/frames.hpp"

// One port: plain HTTP GET for static assets and county geometry, WebSocket
// upgrade for the map protocol.
namespace wildfire::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

struct ServerConfig {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;
  std::string counties_geojson;  // response body for /counties.geojson
  std::filesystem::path static_dir;
  std::size_t threads = 2;
};

inline std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".geojson") return "application/geo+json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  return "application/octet-stream";
}

// Maps "/static/<rel>" onto a file under root, refusing anything that would
// escape it.
inline std::optional<std::filesystem::path> resolve_static(const std::filesystem::path& root, std::string_view target) {
  constexpr std::string_view prefix = "/static/";
  if (root.empty() || target.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string rel(target.substr(prefix.size()));
  if (const auto q = rel.find_first_of("?#"); q != std::string::npos) rel.resize(q);
  if (rel.empty() || rel.find('\\') != std::string::npos || rel.find('\0') != std::string::npos) return std::nullopt;
  for (const auto& part : std::filesystem::path(rel))
    if (part == ".." || part == "." || part.has_root_path()) return std::nullopt;
  std::error_code ec;
  const auto base = std::filesystem::weakly_canonical(root, ec);
  if (ec) return std::nullopt;
  const auto full = std::filesystem::weakly_canonical(base / rel, ec);
  if (ec) return std::nullopt;
  const auto [mismatch, _] = std::mismatch(base.begin(), base.end(), full.begin(), full.end());
  if (mismatch != base.end() || !std::filesystem::is_regular_file(full, ec)) return std::nullopt;
  return full;
}

class Server;

// Sessions register with the server so shutdown can reach them.
class Closable {
 public:
  virtual ~Closable() = default;
  virtual void close() = 0;
};

class SessionCount {
 public:
  explicit SessionCount(Server& server);
  ~SessionCount();
  SessionCount(const SessionCount&) = delete;
  SessionCount& operator=(const SessionCount&) = delete;

 protected:
  Server& server_;
};

class WsSession : public Closable, public SessionCount, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Server& server);

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  // Sends a going-away close frame once queued frames are out.
  void close() override {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closing_) return;
      self->closing_ = true;
      if (!self->accepted_ || self->writing_) return;  // on_accept / on_write take over
      self->do_close();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    accepted_ = true;
    if (closing_) return do_close();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;  // peer closed, timeout, or our own close completed
    const auto text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (closing_) return;
    for (auto& frame : handle_message(data_, state_, text)) enqueue(frame.dump());
    do_read();
  }

  void enqueue(std::string msg) {
    queue_.push_back(std::move(msg));
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) return;
    queue_.pop_front();
    if (!queue_.empty()) return do_write();
    if (closing_) do_close();
  }

  void do_close() {
    if (close_sent_) return;
    close_sent_ = true;
    ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  const ServiceData& data_;
  beast::flat_buffer buffer_;
  SessionState state_;
  std::deque<std::string> queue_;
  bool accepted_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool close_sent_ = false;
};

class HttpSession : public Closable, public SessionCount, public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Server& server) : SessionCount(server), stream_(std::move(socket)) {}
  void start() { do_read(); }

  void close() override {
    asio::post(stream_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (!self->writing_) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_both, ignored);
        self->stream_.socket().close(ignored);
      }
    });
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t);

  void send(http::response<http::string_body> res) {
    auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
    writing_ = true;
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec || sp->need_eof() || self->closing_) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  bool writing_ = false;
  bool closing_ = false;
};

class Server {
 public:
  Server(std::shared_ptr<const ServiceData> data, ServerConfig config)
      : data_(std::move(data)), config_(std::move(config)) {
    const auto address = asio::ip::make_address(config_.address);
    const tcp::endpoint endpoint{address, config_.port};
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(asio::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
  }

  ~Server() {
    destroying_ = true;
  }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const { return port_; }
  const ServiceData& data() const { return *data_; }
  const ServerConfig& config() const { return config_; }
  bool stopping() const { return stopping_; }

  // Blocks until stop() has drained every session.
  void run() {
    do_accept();
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < std::max<std::size_t>(1, config_.threads); ++i) pool.emplace_back([this] { ioc_.run(); });
    ioc_.run();
    for (auto& t : pool) t.join();
  }

  // Stops accepting and closes every session; WebSockets get a close frame.
  // run() returns when all sessions are gone or after a grace period.
  // Safe from any thread.
  void stop() {
    asio::post(acceptor_.get_executor(), [this] {
      if (stopping_.exchange(true)) return;
      beast::error_code ec;
      acceptor_.close(ec);
      if (signals_) signals_->cancel(ec);
      grace_.expires_after(std::chrono::seconds(3));
      grace_.async_wait([this](beast::error_code e) {
        if (!e) ioc_.stop();
      });
      std::vector<std::shared_ptr<Closable>> live;
      {
        const std::lock_guard lock(mutex_);
        for (auto& w : sessions_)
          if (auto s = w.lock()) live.push_back(std::move(s));
        sessions_.clear();
      }
      for (auto& s : live) s->close();
      maybe_finish();
    });
  }

  // SIGINT/SIGTERM trigger stop().
  void stop_on_signals() {
    signals_ = std::make_unique<asio::signal_set>(acceptor_.get_executor(), SIGINT, SIGTERM);
    signals_->async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }

  void register_session(const std::shared_ptr<Closable>& s) {
    const std::lock_guard lock(mutex_);
    std::erase_if(sessions_, [](const auto& w) { return w.expired(); });
    sessions_.push_back(s);
  }

  void session_opened() { ++live_; }
  void session_closed() {
    if (destroying_) return;
    if (--live_ == 0 && stopping_) asio::post(acceptor_.get_executor(), [this] { maybe_finish(); });
  }

 private:
  void do_accept() {
    acceptor_.async_accept(asio::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
      if (ec || stopping_) return;
      auto session = std::make_shared<HttpSession>(std::move(socket), *this);
      register_session(session);
      session->start();
      do_accept();
    });
  }

  void maybe_finish() {
    if (live_ == 0) grace_.cancel();
  }

  // Declared first so it outlives the io_context, whose pending handlers
  // may still own sessions when it is destroyed.
  std::atomic<bool> destroying_{false};
  std::shared_ptr<const ServiceData> data_;
  ServerConfig config_;
  asio::io_context ioc_;
  tcp::acceptor acceptor_{asio::make_strand(ioc_)};
  asio::steady_timer grace_{acceptor_.get_executor()};
  unsigned short port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<int> live_{0};
  std::mutex mutex_;
  std::vector<std::weak_ptr<Closable>> sessions_;
  std::unique_ptr<asio::signal_set> signals_;
};

inline SessionCount::SessionCount(Server& server) : server_(server) { server_.session_opened(); }
inline SessionCount::~SessionCount() { server_.session_closed(); }

inline WsSession::WsSession(tcp::socket&& socket, Server& server)
    : SessionCount(server), ws_(std::move(socket)), data_(server.data()) {}

inline void HttpSession::on_read(beast::error_code ec, std::size_t) {
  if (ec == http::error::end_of_stream) {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    return;
  }
  if (ec) return;

  if (websocket::is_upgrade(req_)) {
    if (server_.stopping()) return;
    auto session = std::make_shared<WsSession>(stream_.release_socket(), server_);
    server_.register_session(session);
    session->start(std::move(req_));
    return;
  }

  const auto make = [&](http::status status, std::string_view type, std::string body) {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::server, "wildfire-map");
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.keep_alive(req_.keep_alive());
    res.body() = req_.method() == http::verb::head ? std::string() : std::move(body);
    res.prepare_payload();
    return res;
  };

  if (req_.method() != http::verb::get && req_.method() != http::verb::head)
    return send(make(http::status::method_not_allowed, "text/plain", "method not allowed\n"));

  const std::string_view target(req_.target().data(), req_.target().size());
  const auto path = target.substr(0, target.find('?'));
  if (path == "/healthz") return send(make(http::status::ok, "text/plain", "ok"));
  if (path == "/counties.geojson")
    return send(make(http::status::ok, "application/geo+json", server_.config().counties_geojson));
  if (path == "/" || path == "/index.html") {
    if (const auto index = resolve_static(server_.config().static_dir, "/static/index.html")) {
      std::ifstream in(*index, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return send(make(http::status::ok, mime_type(*index), ss.str()));
    }
  }
  if (const auto file = resolve_static(server_.config().static_dir, path)) {
    std::ifstream in(*file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return send(make(http::status::ok, mime_type(*file), ss.str()));
  }
  return send(make(http::status::not_found, "text/plain", "not found\n"));
}

}  // namespace wildfire::service
