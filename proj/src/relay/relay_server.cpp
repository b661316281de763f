#include "syncap/relay/relay_server.hpp"

#include <numeric>

#include "syncap/common/error.hpp"

namespace syncap::relay {

const char* to_string(DropReason reason) {
  switch (reason) {
    case DropReason::Malformed: return "malformed";
    case DropReason::UnknownSession: return "unknown_session";
    case DropReason::SessionNotOpen: return "session_not_open";
    case DropReason::NotHost: return "not_host";
    case DropReason::UnknownClient: return "unknown_client";
    case DropReason::Unexpected: return "unexpected";
    case DropReason::Count_: break;
  }
  return "?";
}

std::uint64_t RelayStats::dropped_total() const { return std::accumulate(dropped.begin(), dropped.end(), 0ull); }

std::shared_ptr<RelayServer::Session> RelayServer::find(std::uint64_t session_id) const {
  std::shared_lock lock(registry_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorCode::UnknownSession, "unknown session " + std::to_string(session_id));
  return it->second;
}

void RelayServer::drop(DropReason reason) { ++dropped_[static_cast<std::size_t>(reason)]; }

std::uint64_t RelayServer::register_session(Endpoint host) {
  auto s = std::make_shared<Session>();
  std::unique_lock lock(registry_mutex_);
  const std::uint64_t id = next_id_++;
  s->info.id = id;
  s->info.host = host;
  sessions_.emplace(id, std::move(s));
  return id;
}

std::uint32_t RelayServer::join_session(std::uint64_t session_id, Endpoint client) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (s->info.state != SessionState::Open) fail(ErrorCode::SessionNotOpen, "session no longer accepts joins");
  s->info.clients.push_back(client);
  s->info.departed.push_back(false);
  return static_cast<std::uint32_t>(s->info.clients.size() - 1);
}

void RelayServer::start_capture(std::uint64_t session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (s->info.state == SessionState::Closed) fail(ErrorCode::SessionNotOpen, "session closed");
  s->info.state = SessionState::Capturing;
}

void RelayServer::close_session(std::uint64_t session_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  s->info.state = SessionState::Closed;
}

void RelayServer::depart(std::uint64_t session_id, std::uint32_t client) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  if (client >= s->info.clients.size() || s->info.departed[client])
    fail(ErrorCode::UnknownClient, "no such client");
  s->info.departed[client] = true;
}

std::size_t RelayServer::forward_trigger(Endpoint from, const RelayDatagram& datagram) {
  const auto bytes = encode(datagram);
  auto s = find(datagram.session_id);
  std::vector<Endpoint> targets;
  {
    std::lock_guard lock(s->mutex);
    if (from != s->info.host) {
      drop(DropReason::NotHost);
      fail(ErrorCode::NotHost, "trigger from a non-host endpoint");
    }
    if (s->info.state == SessionState::Closed) fail(ErrorCode::SessionNotOpen, "session closed");
    s->info.state = SessionState::Capturing;
    for (std::size_t a = 0; a < s->info.clients.size(); ++a)
      if (!s->info.departed[a]) targets.push_back(s->info.clients[a]);
  }
  for (auto t : targets) sink_.send(t, bytes);
  forwarded_ += targets.size();
  return targets.size();
}

void RelayServer::echo_rtt(Endpoint from, const RelayDatagram& datagram) {
  const auto bytes = encode(datagram);
  auto s = find(datagram.session_id);
  Endpoint target;
  {
    std::lock_guard lock(s->mutex);
    if (s->info.state == SessionState::Closed) fail(ErrorCode::SessionNotOpen, "session closed");
    const std::uint32_t a = datagram.client.value_or(kHostIndex);
    if (a >= s->info.clients.size() || s->info.departed[a]) fail(ErrorCode::UnknownClient, "no such client");
    if (datagram.kind == DatagramKind::RttProbe) {
      if (from != s->info.host) fail(ErrorCode::NotHost, "probe from a non-host endpoint");
      target = s->info.clients[a];
    } else {
      if (from != s->info.clients[a]) fail(ErrorCode::UnknownClient, "echo from a different endpoint");
      target = s->info.host;
    }
  }
  sink_.send(target, bytes);
  ++forwarded_;
}

void RelayServer::dispatch(Endpoint from, const RelayDatagram& d) {
  switch (d.kind) {
    case DatagramKind::Join: {
      RelayDatagram ack{DatagramKind::JoinAck, d.session_id, 0, d.timestamp_ns, kHostIndex};
      if (d.session_id == 0)
        ack.session_id = register_session(from);
      else
        ack.client = join_session(d.session_id, from);
      sink_.send(from, encode(ack));
      return;
    }
    case DatagramKind::Trigger:
      forward_trigger(from, d);
      return;
    case DatagramKind::RttProbe:
    case DatagramKind::RttEcho:
      echo_rtt(from, d);
      return;
    case DatagramKind::Close: {
      auto s = find(d.session_id);
      std::lock_guard lock(s->mutex);
      if (from == s->info.host) {
        s->info.state = SessionState::Closed;
        return;
      }
      for (std::size_t a = 0; a < s->info.clients.size(); ++a)
        if (s->info.clients[a] == from && !s->info.departed[a]) {
          s->info.departed[a] = true;
          return;
        }
      fail(ErrorCode::UnknownClient, "close from an unknown endpoint");
    }
    case DatagramKind::JoinAck:
      drop(DropReason::Unexpected);
      return;
  }
}

void RelayServer::handle(Endpoint from, std::span<const std::uint8_t> bytes) {
  ++received_;
  const auto d = decode(bytes);
  if (!d) {
    drop(DropReason::Malformed);
    return;
  }
  try {
    dispatch(from, *d);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::NotHost:
        if (d->kind != DatagramKind::Trigger) drop(DropReason::NotHost);  // triggers count their own
        break;
      case ErrorCode::UnknownSession: drop(DropReason::UnknownSession); break;
      case ErrorCode::SessionNotOpen: drop(DropReason::SessionNotOpen); break;
      case ErrorCode::UnknownClient: drop(DropReason::UnknownClient); break;
      default: drop(DropReason::Unexpected); break;
    }
  } catch (...) {
    drop(DropReason::Unexpected);
  }
}

std::optional<SessionInfo> RelayServer::session(std::uint64_t session_id) const {
  std::shared_ptr<Session> s;
  {
    std::shared_lock lock(registry_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->info;
}

RelayStats RelayServer::stats() const {
  RelayStats out;
  out.received = received_;
  out.forwarded = forwarded_;
  for (std::size_t i = 0; i < out.dropped.size(); ++i) out.dropped[i] = dropped_[i];
  return out;
}

}  // namespace syncap::relay
