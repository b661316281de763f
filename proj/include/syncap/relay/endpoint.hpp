#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>

namespace syncap::relay {

// Opaque transport address: IPv4 address and port for UDP, a node id in the
// simulated network.
struct Endpoint {
  std::uint64_t id = 0;

  auto operator<=>(const Endpoint&) const = default;
};

// Outbound half of a datagram transport. Implementations must not block.
class DatagramSink {
 public:
  virtual ~DatagramSink() = default;
  virtual void send(Endpoint to, std::span<const std::uint8_t> bytes) = 0;
};

}  // namespace syncap::relay

template <>
struct std::hash<syncap::relay::Endpoint> {
  std::size_t operator()(const syncap::relay::Endpoint& e) const noexcept { return std::hash<std::uint64_t>{}(e.id); }
};
