#pragma once

#include <functional>

#include "syncap/sync/time.hpp"

namespace syncap::sync {

/// The four timestamps of one exchange: t0 client send, t1 server receive,
/// t2 server send (server clock), t3 client receive (client clock).
struct NtpTimestamps {
  Nanos t0 = 0;
  Nanos t1 = 0;
  Nanos t2 = 0;
  Nanos t3 = 0;
};

/// ((t1 - t0) + (t2 - t3)) / 2: estimate of server minus client.
double ntp_offset(const NtpTimestamps& ts);

/// (t3 - t0) - (t2 - t1).
Nanos ntp_round_trip(const NtpTimestamps& ts);

/// Performs the request-th exchange.
using NtpExchange = std::function<NtpTimestamps(int request)>;

/// Mean of the per-request offsets over `request_count` exchanges.
double estimate_ntp_offset(int request_count, const NtpExchange& exchange);

}  // namespace syncap::sync
