#include "syncap/sim/network.hpp"

#include <cmath>
#include <vector>

#include "syncap/common/error.hpp"

namespace syncap::sim {

void Simulator::schedule(Nanos at, Action action) {
  if (at < now_) fail(ErrorCode::InvalidArgument, "cannot schedule in the past");
  queue_.push({at, seq_++, std::move(action)});
}

void Simulator::run_until(Nanos until) {
  while (!queue_.empty() && queue_.top().at <= until) {
    // copy out before pop: the action may schedule more events
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    e.action();
  }
  if (until > now_) now_ = until;
}

void Simulator::run() {
  while (!queue_.empty()) {
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    e.action();
  }
}

std::optional<Nanos> network_deliver(Nanos send_time, const LinkModel& link, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  // fixed draw order: loss, then jitter, whether or not the datagram survives
  const bool lost = u(rng) < link.loss;
  const double z = n(rng);
  double delay_ms = link.base_ms;
  if (link.jitter_ms > 0.0) {
    switch (link.shape) {
      case JitterShape::None:
        break;
      case JitterShape::Normal:
        delay_ms = std::max(0.0, delay_ms + link.jitter_ms * z);
        break;
      case JitterShape::LogNormal: {
        // mean and standard deviation both jitter_ms
        const double s2 = std::log(2.0);
        const double mu = std::log(link.jitter_ms) - 0.5 * s2;
        delay_ms += std::exp(mu + std::sqrt(s2) * z);
        break;
      }
    }
  }
  if (lost) return std::nullopt;
  return send_time + sync::ms_to_ns(delay_ms);
}

struct SimNetwork::Node {
  AccessLink link;
  Receiver receiver;
  Rng up_rng;
  Rng down_rng;
  bool is_relay = false;
  Nanos processing = 0;
  std::unique_ptr<Port> port;
};

class SimNetwork::Port final : public relay::DatagramSink {
 public:
  Port(SimNetwork& net, relay::Endpoint self) : net_(net), self_(self) {}
  void send(relay::Endpoint to, std::span<const std::uint8_t> bytes) override { net_.transmit(self_, to, bytes); }

 private:
  SimNetwork& net_;
  relay::Endpoint self_;
};

SimNetwork::SimNetwork(Simulator& sim, std::uint64_t seed) : sim_(sim), seed_(seed) {}

SimNetwork::~SimNetwork() = default;

relay::Endpoint SimNetwork::add_relay(Nanos processing, Receiver receiver) {
  if (relay_) fail(ErrorCode::InvalidArgument, "network already has a relay");
  const relay::Endpoint ep{next_id_++};
  auto node = std::make_unique<Node>();
  node->receiver = std::move(receiver);
  node->is_relay = true;
  node->processing = processing;
  node->port = std::make_unique<Port>(*this, ep);
  nodes_.emplace(ep.id, std::move(node));
  relay_ = ep;
  return ep;
}

relay::Endpoint SimNetwork::add_device(AccessLink link, Receiver receiver) {
  const relay::Endpoint ep{next_id_++};
  auto node = std::make_unique<Node>();
  node->link = link;
  node->receiver = std::move(receiver);
  node->up_rng = make_rng(seed_, "uplink", ep.id);
  node->down_rng = make_rng(seed_, "downlink", ep.id);
  node->port = std::make_unique<Port>(*this, ep);
  nodes_.emplace(ep.id, std::move(node));
  return ep;
}

void SimNetwork::set_receiver(relay::Endpoint node, Receiver receiver) {
  auto it = nodes_.find(node.id);
  if (it == nodes_.end()) fail(ErrorCode::InvalidArgument, "unknown node");
  it->second->receiver = std::move(receiver);
}

AccessLink& SimNetwork::link(relay::Endpoint node) {
  auto it = nodes_.find(node.id);
  if (it == nodes_.end()) fail(ErrorCode::InvalidArgument, "unknown node");
  return it->second->link;
}

relay::DatagramSink& SimNetwork::port(relay::Endpoint node) {
  auto it = nodes_.find(node.id);
  if (it == nodes_.end()) fail(ErrorCode::InvalidArgument, "unknown node");
  return *it->second->port;
}

void SimNetwork::transmit(relay::Endpoint from, relay::Endpoint to, std::span<const std::uint8_t> bytes) {
  ++sent_;
  auto src = nodes_.find(from.id), dst = nodes_.find(to.id);
  if (src == nodes_.end() || dst == nodes_.end()) {
    ++lost_;
    return;
  }
  Node& s = *src->second;
  Node& d = *dst->second;

  std::optional<Nanos> at = sim_.now();
  if (s.is_relay) {
    at = network_deliver(*at + s.processing, d.link.down, d.down_rng);
  } else if (d.is_relay) {
    at = network_deliver(*at, s.link.up, s.up_rng);
  } else {
    at = network_deliver(*at, s.link.up, s.up_rng);
    if (at) at = network_deliver(*at, d.link.down, d.down_rng);
  }
  if (!at) {
    ++lost_;
    return;
  }
  std::vector<std::uint8_t> copy(bytes.begin(), bytes.end());
  sim_.schedule(*at, [this, from, to, data = std::move(copy)]() {
    auto it = nodes_.find(to.id);
    if (it != nodes_.end() && it->second->receiver) it->second->receiver(from, data);
  });
}

Nanos FluidLink::deliver(std::size_t bytes, Nanos send_time) {
  if (!(cap_ > 0.0)) fail(ErrorCode::InvalidArgument, "link capacity must be positive");
  const Nanos start = std::max(send_time, free_at_);
  const Nanos finish = start + static_cast<Nanos>(std::llround(static_cast<double>(bytes) / cap_ * 1e9));
  free_at_ = finish;
  bursts_.push_back({send_time, start, finish, bytes});
  return finish + latency_;
}

double FluidLink::backlog(Nanos t) const {
  double total = 0.0;
  for (const auto& b : bursts_) {
    if (b.sent > t || b.finish <= t) continue;
    if (t <= b.start) {
      total += static_cast<double>(b.bytes);
    } else {
      const double left = static_cast<double>(b.finish - t) / static_cast<double>(b.finish - b.start);
      total += left * static_cast<double>(b.bytes);
    }
  }
  return total;
}

std::uint64_t FluidLink::delivered_bytes(Nanos t) const {
  std::uint64_t total = 0;
  for (const auto& b : bursts_)
    if (b.finish + latency_ <= t) total += b.bytes;
  return total;
}

}  // namespace syncap::sim
