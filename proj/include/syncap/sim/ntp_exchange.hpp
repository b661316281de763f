#pragma once

#include <span>

#include "syncap/common/rng.hpp"
#include "syncap/sim/network.hpp"
#include "syncap/sync/clock.hpp"
#include "syncap/sync/ntp.hpp"

namespace syncap::sim {

/// One simulated NTP request starting at global time `global_start`: the
/// client stamps t0/t3 on its clock, the server t1/t2 on its own, and the
/// request and reply each cross their chain of hops. Loss is ignored: a lost
/// exchange would simply be retried.
sync::NtpTimestamps ntp_exchange(sync::Nanos global_start, const sync::DeviceClock& client,
                                 const sync::DeviceClock& server, std::span<const LinkModel> forward,
                                 std::span<const LinkModel> back, Rng& rng, sync::Nanos server_turnaround = 50'000);

inline sync::NtpTimestamps ntp_exchange(sync::Nanos global_start, const sync::DeviceClock& client,
                                        const sync::DeviceClock& server, const LinkModel& forward,
                                        const LinkModel& back, Rng& rng, sync::Nanos server_turnaround = 50'000) {
  return ntp_exchange(global_start, client, server, std::span(&forward, 1), std::span(&back, 1), rng,
                      server_turnaround);
}

}  // namespace syncap::sim
