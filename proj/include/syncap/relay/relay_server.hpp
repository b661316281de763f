#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <vector>

#include "syncap/relay/datagram.hpp"
#include "syncap/relay/endpoint.hpp"

namespace syncap::relay {

enum class SessionState { Open, Capturing, Closed };

enum class DropReason : std::size_t {
  Malformed,
  UnknownSession,
  SessionNotOpen,
  NotHost,
  UnknownClient,
  Unexpected,  // a kind the relay never receives (JOIN_ACK) or a closed session
  Count_,
};

const char* to_string(DropReason reason);

struct SessionInfo {
  std::uint64_t id = 0;
  Endpoint host;
  std::vector<Endpoint> clients;  // index a -> endpoint
  std::vector<bool> departed;
  SessionState state = SessionState::Open;
};

struct RelayStats {
  std::uint64_t received = 0;
  std::uint64_t forwarded = 0;
  std::array<std::uint64_t, static_cast<std::size_t>(DropReason::Count_)> dropped{};

  std::uint64_t dropped_total() const;
};

/// Session registry and host-to-client fan-out. Thread-safe: sessions are
/// looked up under a shared lock and mutated under their own mutex; sends
/// happen after the session lock is released.
class RelayServer {
 public:
  explicit RelayServer(DatagramSink& sink) : sink_(sink) {}

  /// Entry point for every received datagram. Never throws; anything that
  /// cannot be served is dropped and counted.
  void handle(Endpoint from, std::span<const std::uint8_t> bytes);

  std::uint64_t register_session(Endpoint host);
  /// Throws UnknownSession or SessionNotOpen.
  std::uint32_t join_session(std::uint64_t session_id, Endpoint client);
  /// Forwards a host TRIGGER to every joined client. The first trigger moves
  /// an OPEN session to CAPTURING. Throws UnknownSession, NotHost (counted
  /// as a drop) or SessionNotOpen for a closed session. Returns fan-out size.
  std::size_t forward_trigger(Endpoint from, const RelayDatagram& datagram);
  /// Host probe to client a goes to the client; the client's echo goes back
  /// to the host with the timestamp untouched. Throws UnknownClient.
  void echo_rtt(Endpoint from, const RelayDatagram& datagram);
  void start_capture(std::uint64_t session_id);
  void close_session(std::uint64_t session_id);
  void depart(std::uint64_t session_id, std::uint32_t client);

  std::optional<SessionInfo> session(std::uint64_t session_id) const;
  RelayStats stats() const;

 private:
  struct Session {
    std::mutex mutex;
    SessionInfo info;
  };

  std::shared_ptr<Session> find(std::uint64_t session_id) const;
  void drop(DropReason reason);
  void dispatch(Endpoint from, const RelayDatagram& d);

  DatagramSink& sink_;
  mutable std::shared_mutex registry_mutex_;
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;

  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> forwarded_{0};
  std::array<std::atomic<std::uint64_t>, static_cast<std::size_t>(DropReason::Count_)> dropped_{};
};

}  // namespace syncap::relay
