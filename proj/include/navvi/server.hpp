#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "navvi/gateway.hpp"

namespace navvi {

/// WebSocket front end for GatewayCore. Ticks, inbound messages and
/// broadcasts all run on one I/O thread.
class WebSocketServer {
 public:
  /// Binds immediately; throws Error when the port is unavailable. Port 0
  /// picks a free port.
  WebSocketServer(GatewayConfig config, std::uint16_t port, const std::string& address = "0.0.0.0");
  ~WebSocketServer();

  std::uint16_t port() const;

  /// Blocks until stop(), or SIGINT/SIGTERM when `handle_signals` is set.
  void run(bool handle_signals = false);
  /// Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace navvi
