#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace syncap::relay {

inline constexpr std::array<std::uint8_t, 4> kDatagramMagic{'S', 'Y', 'N', 'C'};
inline constexpr std::uint8_t kDatagramVersion = 1;
inline constexpr std::size_t kHeaderSize = 26;
inline constexpr std::uint32_t kHostIndex = 0xFFFFFFFF;

enum class DatagramKind : std::uint8_t {
  Join = 1,
  JoinAck = 2,
  Trigger = 3,
  RttProbe = 4,
  RttEcho = 5,
  Close = 6,
};

// 26-byte little-endian header: magic[4] version u8 kind u8 session u64
// trigger u32 timestamp_ns i64. JOIN_ACK, RTT_PROBE and RTT_ECHO append a
// u32 client index (kHostIndex in the ack to a host).
struct RelayDatagram {
  DatagramKind kind = DatagramKind::Trigger;
  std::uint64_t session_id = 0;
  std::uint32_t trigger_id = 0;
  std::int64_t timestamp_ns = 0;
  std::optional<std::uint32_t> client;

  bool operator==(const RelayDatagram&) const = default;
};

enum class DecodeError { TooShort, BadMagic, BadVersion, UnknownKind, BadBody };

std::vector<std::uint8_t> encode(const RelayDatagram& d);

/// Parses a datagram; on failure returns nullopt and reports why.
std::optional<RelayDatagram> decode(std::span<const std::uint8_t> bytes, DecodeError* error = nullptr);

bool carries_client_index(DatagramKind kind);

}  // namespace syncap::relay
