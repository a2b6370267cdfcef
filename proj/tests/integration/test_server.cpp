#include <chrono>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "doctest.h"
#include "navvi/error.hpp"
#include "navvi/server.hpp"

using namespace navvi;
using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Client {
 public:
  explicit Client(std::uint16_t port) : stream_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(stream_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    stream_.handshake("127.0.0.1", "/");
  }

  void send(const std::string& text) { stream_.write(asio::buffer(text)); }

  json read() {
    beast::flat_buffer buf;
    stream_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  json read_type(const std::string& type, int limit = 500) {
    for (int i = 0; i < limit; ++i) {
      json j = read();
      if (j.at("type") == type) return j;
    }
    throw Error("no " + type + " message");
  }

 private:
  asio::io_context ioc_;
  ws::stream<tcp::socket> stream_;
};

struct Running {
  explicit Running(GatewayConfig cfg) : server(std::move(cfg), 0, "127.0.0.1") {
    thread = std::thread([this] { server.run(); });
  }
  ~Running() {
    server.stop();
    thread.join();
  }
  WebSocketServer server;
  std::thread thread;
};

GatewayConfig config() {
  GatewayConfig c;
  c.scene_dir = NAVVI_TEST_SCENE_DIR;
  return c;
}

}  // namespace

TEST_CASE("driver steers the robot over a websocket") {
  Running srv(config());
  Client driver(srv.server.port());
  CHECK(driver.read_type("hello").at("role") == "driver");
  Client observer(srv.server.port());
  CHECK(observer.read_type("hello").at("role") == "observer");

  driver.send(R"({"v":"navvi-wire/1","type":"load_scene","name":"empty_room"})");
  CHECK(driver.read_type("scene").at("scene").at("name") == "empty_room");
  driver.send(R"({"v":"navvi-wire/1","type":"start"})");
  driver.send(R"({"v":"navvi-wire/1","type":"axes","axis_x":0,"axis_y":1})");

  observer.send(R"({"v":"navvi-wire/1","type":"axes","axis_x":1,"axis_y":-1})");
  CHECK(observer.read_type("error").at("code") == "not_driver");

  std::uint64_t last_seq = 0;
  double first_z = -1.0, last_z = -1.0, last_heading = 0.0;
  for (int i = 0; i < 10; ++i) {
    const json s = driver.read_type("snapshot");
    const auto seq = s.at("seq").get<std::uint64_t>();
    CHECK(seq > last_seq);
    last_seq = seq;
    last_z = s.at("robot").at("z").get<double>();
    last_heading = s.at("robot").at("heading").get<double>();
    if (first_z < 0) first_z = last_z;
  }
  CHECK(last_z > first_z);
  CHECK(last_heading == 0.0);

  driver.send("this is not json");
  const json err = driver.read_type("error");
  CHECK(err.at("code") == "malformed_json");
  CHECK(driver.read_type("snapshot").at("seq").get<std::uint64_t>() > last_seq);
}

TEST_CASE("observer is promoted when the driver disconnects") {
  Running srv(config());
  auto driver = std::make_unique<Client>(srv.server.port());
  driver->read_type("hello");
  Client observer(srv.server.port());
  CHECK(observer.read_type("hello").at("role") == "observer");
  driver.reset();
  CHECK(observer.read_type("role").at("role") == "driver");
}

TEST_CASE("a busy port fails at startup") {
  WebSocketServer first(config(), 0, "127.0.0.1");
  CHECK_THROWS_AS(WebSocketServer(config(), first.port(), "127.0.0.1"), Error);
}
