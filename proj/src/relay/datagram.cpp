#include "syncap/relay/datagram.hpp"

#include <algorithm>

#include "syncap/common/bytes.hpp"

namespace syncap::relay {

bool carries_client_index(DatagramKind kind) {
  return kind == DatagramKind::JoinAck || kind == DatagramKind::RttProbe || kind == DatagramKind::RttEcho;
}

std::vector<std::uint8_t> encode(const RelayDatagram& d) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4);
  ByteWriter w(out);
  w.bytes(kDatagramMagic);
  w.u8(kDatagramVersion);
  w.u8(static_cast<std::uint8_t>(d.kind));
  w.u64(d.session_id);
  w.u32(d.kind == DatagramKind::Trigger ? d.trigger_id : 0);
  w.i64(d.timestamp_ns);
  if (carries_client_index(d.kind)) w.u32(d.client.value_or(0));
  return out;
}

std::optional<RelayDatagram> decode(std::span<const std::uint8_t> bytes, DecodeError* error) {
  auto failed = [&](DecodeError e) -> std::optional<RelayDatagram> {
    if (error) *error = e;
    return std::nullopt;
  };
  if (bytes.size() < kHeaderSize) return failed(DecodeError::TooShort);
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kDatagramMagic.begin())) return failed(DecodeError::BadMagic);
  if (r.u8() != kDatagramVersion) return failed(DecodeError::BadVersion);
  const std::uint8_t kind = r.u8();
  if (kind < 1 || kind > 6) return failed(DecodeError::UnknownKind);

  RelayDatagram d;
  d.kind = static_cast<DatagramKind>(kind);
  d.session_id = r.u64();
  d.trigger_id = r.u32();
  d.timestamp_ns = r.i64();
  if (carries_client_index(d.kind)) {
    if (r.remaining() != 4) return failed(DecodeError::BadBody);
    d.client = r.u32();
  } else if (r.remaining() != 0) {
    return failed(DecodeError::BadBody);
  }
  return d;
}

}  // namespace syncap::relay
