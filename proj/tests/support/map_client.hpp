#pragma once

#include <sys/socket.h>
#include <sys/time.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <string>

#include "json.hpp"

// Blocking HTTP and WebSocket clients for talking to a local map server.
namespace wildfire::testkit {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

// Reads fail instead of hanging forever when the server goes quiet.
inline void set_receive_timeout(tcp::socket& s, int seconds) {
  timeval tv{seconds, 0};
  setsockopt(s.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

struct HttpReply {
  int status = 0;
  std::string content_type;
  std::string body;
};

inline HttpReply http_get(unsigned short port, const std::string& target) {
  asio::io_context ioc;
  tcp::socket socket(ioc);
  socket.connect({asio::ip::make_address("127.0.0.1"), port});
  set_receive_timeout(socket, 10);
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.keep_alive(false);
  http::write(socket, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(socket, buffer, res);
  beast::error_code ec;
  socket.shutdown(tcp::socket::shutdown_both, ec);
  return {static_cast<int>(res.result_int()), std::string(res[http::field::content_type]), res.body()};
}

class MapClient {
 public:
  explicit MapClient(unsigned short port) : ws_(ioc_) {
    ws_.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
    set_receive_timeout(ws_.next_layer(), 10);
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/ws");
  }

  void send(const nlohmann::json& msg) { ws_.write(asio::buffer(msg.dump())); }

  // Next text frame parsed as JSON. Throws on close or timeout.
  nlohmann::json receive() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return nlohmann::json::parse(beast::buffers_to_string(buffer.data()));
  }

  // Reads until the peer closes; returns its close code, or -1 if the
  // connection dropped without a close frame.
  int await_close() {
    try {
      for (;;) {
        beast::flat_buffer buffer;
        ws_.read(buffer);
      }
    } catch (const beast::system_error& e) {
      if (e.code() == websocket::error::closed) return static_cast<int>(ws_.reason().code);
      return -1;
    }
  }

  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }

 private:
  asio::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

}  // namespace wildfire::testkit
