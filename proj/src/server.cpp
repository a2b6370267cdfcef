#include "navvi/server.hpp"

#include <chrono>
#include <deque>
#include <map>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace navvi {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace ws = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxQueuedWrites = 256;

}  // namespace

struct WebSocketServer::Impl {
  struct Session : std::enable_shared_from_this<Session> {
    Session(Impl& owner, tcp::socket socket) : owner(owner), stream(std::move(socket)) {}

    void start() {
      stream.set_option(ws::stream_base::timeout::suggested(beast::role_type::server));
      stream.async_accept([self = shared_from_this()](beast::error_code ec) {
        if (ec) return;
        self->open = true;
        self->id = self->owner.attach(self);
        self->read();
      });
    }

    void read() {
      stream.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->closed();
        const std::string text = beast::buffers_to_string(self->buffer.data());
        self->buffer.consume(self->buffer.size());
        self->owner.dispatch(self->owner.core.receive(self->id, text));
        self->read();
      });
    }

    void send(std::string text) {
      if (!open || outbox.size() >= kMaxQueuedWrites) return;
      outbox.push_back(std::move(text));
      if (outbox.size() == 1) write();
    }

    void write() {
      stream.text(true);
      stream.async_write(asio::buffer(outbox.front()),
                         [self = shared_from_this()](beast::error_code ec, std::size_t) {
                           if (ec) return self->closed();
                           self->outbox.pop_front();
                           if (!self->outbox.empty()) self->write();
                         });
    }

    void closed() {
      if (!open) return;
      open = false;
      outbox.clear();
      owner.detach(id);
    }

    Impl& owner;
    ws::stream<tcp::socket> stream;
    beast::flat_buffer buffer;
    std::deque<std::string> outbox;
    std::uint64_t id = 0;
    bool open = false;
  };

  Impl(GatewayConfig config, std::uint16_t port, const std::string& address)
      : core(config), acceptor(ioc), timer(ioc),
        period(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / config.tick_hz))) {
    beast::error_code ec;
    const tcp::endpoint ep(asio::ip::make_address(address, ec), port);
    if (ec) throw Error("bad listen address '" + address + "': " + ec.message());
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error("cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
  }

  std::uint64_t attach(const std::shared_ptr<Session>& s) {
    auto out = core.connect();
    const std::uint64_t id = out.front().client;
    sessions[id] = s;
    dispatch(std::move(out));
    return id;
  }

  void detach(std::uint64_t id) {
    sessions.erase(id);
    dispatch(core.disconnect(id));
  }

  void dispatch(std::vector<Outgoing> out) {
    for (Outgoing& o : out) {
      if (o.client == 0) {
        for (auto& [id, s] : sessions) s->send(o.text);
      } else if (auto it = sessions.find(o.client); it != sessions.end()) {
        it->second->send(std::move(o.text));
      }
    }
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Session>(*this, std::move(socket))->start();
      accept();
    });
  }

  void schedule(std::chrono::steady_clock::time_point at) {
    timer.expires_at(at);
    timer.async_wait([this, at](beast::error_code ec) {
      if (ec) return;
      dispatch(core.step());
      auto next = at + period;
      const auto now = std::chrono::steady_clock::now();
      if (next < now) next = now;  // fell behind: do not burst
      schedule(next);
    });
  }

  GatewayCore core;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  std::chrono::steady_clock::duration period;
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions;
};

WebSocketServer::WebSocketServer(GatewayConfig config, std::uint16_t port, const std::string& address)
    : impl_(std::make_unique<Impl>(std::move(config), port, address)) {}

WebSocketServer::~WebSocketServer() = default;

std::uint16_t WebSocketServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WebSocketServer::run(bool handle_signals) {
  asio::signal_set signals(impl_->ioc);
  if (handle_signals) {
    signals.add(SIGINT);
    signals.add(SIGTERM);
    signals.async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  impl_->accept();
  impl_->schedule(std::chrono::steady_clock::now());
  impl_->ioc.run();
  impl_->sessions.clear();
}

void WebSocketServer::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    impl->timer.cancel();
    for (auto& [id, s] : impl->sessions) {
      s->open = false;
      s->stream.next_layer().close(ec);
    }
    impl->ioc.stop();
  });
}

}  // namespace navvi
