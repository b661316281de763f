#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "syncap/common/rng.hpp"
#include "syncap/relay/endpoint.hpp"
#include "syncap/sync/time.hpp"

namespace syncap::sim {

using sync::Nanos;

/// Single-threaded discrete-event core. Events at equal times run in
/// scheduling order.
class Simulator {
 public:
  using Action = std::function<void()>;

  Nanos now() const { return now_; }
  void schedule(Nanos at, Action action);
  void after(Nanos delay, Action action) { schedule(now_ + delay, std::move(action)); }
  /// Runs events up to and including time `until`; the clock ends at `until`.
  void run_until(Nanos until);
  void run();
  std::size_t pending() const { return queue_.size(); }

 private:
  struct Event {
    Nanos at;
    std::uint64_t seq;
    Action action;
    bool operator>(const Event& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  Nanos now_ = 0;
  std::uint64_t seq_ = 0;
};

enum class JitterShape { None, Normal, LogNormal };

/// One network hop. Delay = base + jitter; Normal jitter is truncated so the
/// delay never goes below zero, LogNormal jitter has mean and standard
/// deviation both equal to jitter_ms.
struct LinkModel {
  double base_ms = 5.0;
  double jitter_ms = 0.0;
  JitterShape shape = JitterShape::LogNormal;
  double loss = 0.0;
};

/// Delivery time of a datagram sent at `send_time`, or nullopt when lost.
std::optional<Nanos> network_deliver(Nanos send_time, const LinkModel& link, Rng& rng);

/// Device access link to the relay: uplink (device to relay) and downlink.
struct AccessLink {
  LinkModel up;
  LinkModel down;
};

/// Star network around a relay node, carrying real datagram bytes between
/// simulated endpoints. A device-to-relay hop uses the device's uplink, a
/// relay-to-device hop the device's downlink plus the relay processing time.
class SimNetwork {
 public:
  using Receiver = std::function<void(relay::Endpoint from, std::span<const std::uint8_t> bytes)>;

  SimNetwork(Simulator& sim, std::uint64_t seed);
  ~SimNetwork();
  SimNetwork(const SimNetwork&) = delete;
  SimNetwork& operator=(const SimNetwork&) = delete;

  relay::Endpoint add_relay(Nanos processing, Receiver receiver);
  relay::Endpoint add_device(AccessLink link, Receiver receiver);
  void set_receiver(relay::Endpoint node, Receiver receiver);
  AccessLink& link(relay::Endpoint node);

  /// Sink that sends as `node`.
  relay::DatagramSink& port(relay::Endpoint node);

  std::uint64_t sent() const { return sent_; }
  std::uint64_t lost() const { return lost_; }

 private:
  struct Node;
  class Port;
  void transmit(relay::Endpoint from, relay::Endpoint to, std::span<const std::uint8_t> bytes);

  Simulator& sim_;
  std::uint64_t seed_;
  std::map<std::uint64_t, std::unique_ptr<Node>> nodes_;
  std::optional<relay::Endpoint> relay_;
  std::uint64_t next_id_ = 1;
  std::uint64_t sent_ = 0;
  std::uint64_t lost_ = 0;
};

/// Reliable FIFO link with a byte-rate cap (fluid queue). Never loses data.
class FluidLink {
 public:
  FluidLink(double cap_bytes_per_s, Nanos latency) : cap_(cap_bytes_per_s), latency_(latency) {}

  /// Enqueues `bytes` at `send_time` (non-decreasing); returns when the last
  /// byte reaches the far end.
  Nanos deliver(std::size_t bytes, Nanos send_time);
  /// Bytes sent by `t` but not yet on the wire.
  double backlog(Nanos t) const;
  /// Bytes whose last byte has arrived by `t`.
  std::uint64_t delivered_bytes(Nanos t) const;

 private:
  struct Burst {
    Nanos sent;
    Nanos start;
    Nanos finish;
    std::size_t bytes;
  };
  double cap_;
  Nanos latency_;
  Nanos free_at_ = 0;
  std::vector<Burst> bursts_;
};

}  // namespace syncap::sim
