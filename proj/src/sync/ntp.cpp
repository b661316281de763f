#include "syncap/sync/ntp.hpp"

#include "syncap/common/error.hpp"

namespace syncap::sync {

double ntp_offset(const NtpTimestamps& ts) {
  return (static_cast<double>(ts.t1 - ts.t0) + static_cast<double>(ts.t2 - ts.t3)) / 2.0;
}

Nanos ntp_round_trip(const NtpTimestamps& ts) { return (ts.t3 - ts.t0) - (ts.t2 - ts.t1); }

double estimate_ntp_offset(int request_count, const NtpExchange& exchange) {
  if (request_count < 1) fail(ErrorCode::InvalidArgument, "request count must be >= 1");
  double sum = 0.0;
  for (int r = 0; r < request_count; ++r) sum += ntp_offset(exchange(r));
  return sum / request_count;
}

}  // namespace syncap::sync
