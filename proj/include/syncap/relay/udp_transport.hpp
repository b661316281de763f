#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "syncap/relay/endpoint.hpp"
#include "syncap/relay/relay_server.hpp"

namespace syncap::relay {

inline constexpr std::uint16_t kDefaultRelayPort = 40000;

Endpoint make_endpoint(const std::string& ipv4, std::uint16_t port);
std::string to_string(Endpoint e);

struct ReceivedDatagram {
  Endpoint from;
  std::vector<std::uint8_t> bytes;
};

/// Non-blocking IPv4 UDP socket. Throws IoFailure when it cannot bind.
class UdpSocket final : public DatagramSink {
 public:
  explicit UdpSocket(std::uint16_t port = 0, const std::string& address = "127.0.0.1");
  ~UdpSocket() override;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  Endpoint local() const { return local_; }
  // Best effort: a full socket buffer drops the datagram, like the network would.
  void send(Endpoint to, std::span<const std::uint8_t> bytes) override;
  std::optional<ReceivedDatagram> receive(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  Endpoint local_;
};

/// Runs a RelayServer on a UDP socket from a background thread.
class UdpRelayService {
 public:
  explicit UdpRelayService(std::uint16_t port = 0);
  ~UdpRelayService();

  Endpoint endpoint() const { return socket_.local(); }
  RelayServer& server() { return server_; }

 private:
  UdpSocket socket_;
  RelayServer server_;
  std::jthread worker_;
};

}  // namespace syncap::relay
