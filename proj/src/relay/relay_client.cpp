#include "syncap/relay/relay_client.hpp"

#include "syncap/common/error.hpp"

namespace syncap::relay {

void RelayClient::send(const RelayDatagram& d) { sink_.send(relay_, encode(d)); }

void RelayClient::join_as_host() { send({DatagramKind::Join, 0, 0, 0, std::nullopt}); }

void RelayClient::join(std::uint64_t session_id) {
  if (session_id == 0) fail(ErrorCode::InvalidArgument, "session 0 is reserved for host registration");
  session_ = session_id;
  send({DatagramKind::Join, session_id, 0, 0, std::nullopt});
}

void RelayClient::send_trigger(std::uint32_t trigger_id, std::int64_t host_send_ns) {
  send({DatagramKind::Trigger, session_, trigger_id, host_send_ns, std::nullopt});
}

void RelayClient::send_probe(std::uint32_t client, std::int64_t now_ns) {
  send({DatagramKind::RttProbe, session_, 0, now_ns, client});
}

void RelayClient::leave() { send({DatagramKind::Close, session_, 0, 0, std::nullopt}); }

void RelayClient::handle(std::span<const std::uint8_t> bytes, std::int64_t now_ns) {
  const auto d = decode(bytes);
  if (!d) return;
  switch (d->kind) {
    case DatagramKind::JoinAck:
      if (session_ != 0 && d->session_id != session_) return;
      session_ = d->session_id;
      index_ = d->client;
      return;
    case DatagramKind::Trigger:
      if (d->session_id != session_ || is_host()) return;
      if (filter_.accept(d->trigger_id) && on_trigger_)
        on_trigger_({d->session_id, d->trigger_id, d->timestamp_ns}, now_ns);
      return;
    case DatagramKind::RttProbe:
      if (d->session_id != session_) return;
      send({DatagramKind::RttEcho, session_, 0, d->timestamp_ns, index_.value_or(d->client.value_or(0))});
      return;
    case DatagramKind::RttEcho:
      if (d->session_id == session_ && on_echo_) on_echo_(d->client.value_or(0), now_ns - d->timestamp_ns);
      return;
    default:
      return;
  }
}

}  // namespace syncap::relay
