#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "syncap/relay/datagram.hpp"
#include "syncap/relay/endpoint.hpp"
#include "syncap/sync/trigger.hpp"

namespace syncap::relay {

/// Device side of the relay protocol, for either the host or a client.
/// Time is supplied by the caller so the same logic runs on real sockets and
/// in simulation.
class RelayClient {
 public:
  using TriggerHandler = std::function<void(const sync::TriggerMsg&, std::int64_t arrival_ns)>;
  using EchoHandler = std::function<void(std::uint32_t client, std::int64_t rtt_ns)>;

  RelayClient(DatagramSink& sink, Endpoint relay) : sink_(sink), relay_(relay) {}

  void join_as_host();
  void join(std::uint64_t session_id);

  void send_trigger(std::uint32_t trigger_id, std::int64_t host_send_ns);
  void send_probe(std::uint32_t client, std::int64_t now_ns);
  void leave();

  void on_trigger(TriggerHandler h) { on_trigger_ = std::move(h); }
  void on_echo(EchoHandler h) { on_echo_ = std::move(h); }

  /// Feeds one datagram received from the relay.
  void handle(std::span<const std::uint8_t> bytes, std::int64_t now_ns);

  bool joined() const { return index_.has_value(); }
  bool is_host() const { return index_ == kHostIndex; }
  std::uint64_t session_id() const { return session_; }
  std::optional<std::uint32_t> index() const { return index_; }
  const sync::TriggerFilter& filter() const { return filter_; }

 private:
  void send(const RelayDatagram& d);

  DatagramSink& sink_;
  Endpoint relay_;
  std::uint64_t session_ = 0;
  std::optional<std::uint32_t> index_;
  sync::TriggerFilter filter_;
  TriggerHandler on_trigger_;
  EchoHandler on_echo_;
};

}  // namespace syncap::relay
