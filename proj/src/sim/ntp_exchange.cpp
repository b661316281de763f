#include "syncap/sim/ntp_exchange.hpp"

namespace syncap::sim {

namespace {

sync::Nanos cross(sync::Nanos at, std::span<const LinkModel> hops, Rng& rng) {
  for (LinkModel hop : hops) {
    hop.loss = 0.0;
    at = *network_deliver(at, hop, rng);
  }
  return at;
}

}  // namespace

sync::NtpTimestamps ntp_exchange(sync::Nanos global_start, const sync::DeviceClock& client,
                                 const sync::DeviceClock& server, std::span<const LinkModel> forward,
                                 std::span<const LinkModel> back, Rng& rng, sync::Nanos server_turnaround) {
  const sync::Nanos g1 = cross(global_start, forward, rng);
  const sync::Nanos g2 = g1 + server_turnaround;
  const sync::Nanos g3 = cross(g2, back, rng);
  return {client.local(global_start), server.local(g1), server.local(g2), client.local(g3)};
}

}  // namespace syncap::sim
