#include "syncap/harness/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <ranges>
#include <set>
#include <tuple>

#include <json.hpp>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/payload_codecs.hpp"
#include "syncap/dataplane/record.hpp"
#include "syncap/dataplane/store.hpp"
#include "syncap/dataplane/stream_frame.hpp"
#include "syncap/dataplane/verify.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/relay/relay_client.hpp"
#include "syncap/relay/relay_server.hpp"
#include "syncap/sim/ntp_exchange.hpp"
#include "syncap/sim/observe.hpp"
#include "syncap/sim/pose_noise.hpp"
#include "syncap/sync/ntp.hpp"
#include "syncap/sync/trigger.hpp"

namespace syncap::harness {

using sync::Nanos;

sync::SyncScheme scheme_from_name(const std::string& name, int ntp_requests) {
  if (name == "trigger_relay") return sync::SyncScheme::trigger_relay();
  if (name == "ntp_baseline") return sync::SyncScheme::ntp_baseline();
  if (name == "ntp_averaged") return sync::SyncScheme::ntp_averaged(ntp_requests);
  if (name == "no_compensation") return sync::SyncScheme::no_compensation();
  fail(ErrorCode::ConfigError, "unknown scheme " + name);
}

namespace {

sim::JitterShape shape_from(const std::string& s) {
  if (s == "normal") return sim::JitterShape::Normal;
  if (s == "none") return sim::JitterShape::None;
  return sim::JitterShape::LogNormal;
}

bool is_relay_variant(const sync::SyncScheme& s) {
  return s.variant == sync::SyncVariant::TriggerRelay || s.variant == sync::SyncVariant::NoCompensation;
}

void record_capture(TimingResult& out, std::uint32_t trigger, std::size_t device, Nanos local) {
  out.captures[trigger].push_back({device, local});
}

void simulate_relay(const TimingSetup& s, const sync::SyncScheme& scheme, std::uint64_t seed, TimingResult& out) {
  const std::size_t count = s.clocks.size();
  sim::Simulator sim;
  sim::SimNetwork net(sim, derive_seed(seed, "network"));
  const auto relay_ep = net.add_relay(s.relay_processing, nullptr);
  relay::RelayServer server(net.port(relay_ep));
  net.set_receiver(relay_ep, [&server](relay::Endpoint from, std::span<const std::uint8_t> b) { server.handle(from, b); });

  std::vector<relay::Endpoint> eps;
  std::vector<std::unique_ptr<relay::RelayClient>> devices;
  for (std::size_t d = 0; d < count; ++d) {
    sim::AccessLink link = s.links[d];
    link.down.loss = 0.0;
    const auto ep = net.add_device(link, nullptr);
    eps.push_back(ep);
    devices.push_back(std::make_unique<relay::RelayClient>(net.port(ep), relay_ep));
    auto* dev = devices.back().get();
    const auto clock = s.clocks[d];
    net.set_receiver(ep, [&sim, dev, clock](relay::Endpoint, std::span<const std::uint8_t> b) {
      dev->handle(b, clock.local(sim.now()));
    });
  }

  devices[0]->join_as_host();
  sim.run();
  if (!devices[0]->is_host()) fail(ErrorCode::UnknownSession, "host registration failed");
  // one at a time, so client d gets relay index d - 1
  for (std::size_t d = 1; d < count; ++d) {
    devices[d]->join(devices[0]->session_id());
    sim.run();
    if (devices[d]->index() != d - 1) fail(ErrorCode::UnknownClient, "client join failed");
  }

  sync::CompensationPlan plan;
  if (scheme.variant == sync::SyncVariant::TriggerRelay && count > 1) {
    const auto samples = static_cast<std::size_t>(s.rtt_samples);
    sync::RttMatrix rtt;
    rtt.rows.assign(count - 1, {});
    devices[0]->on_echo([&rtt, samples](std::uint32_t client, std::int64_t rtt_ns) {
      if (client < rtt.rows.size() && rtt.rows[client].size() < samples)
        rtt.rows[client].push_back(static_cast<double>(rtt_ns) / 1e6);
    });
    auto short_of_samples = [&] {
      return std::any_of(rtt.rows.begin(), rtt.rows.end(), [&](const auto& r) { return r.size() < samples; });
    };
    for (std::size_t round = 0; round < 10 * samples && short_of_samples(); ++round) {
      for (std::uint32_t a = 0; a + 1 < count; ++a)
        if (rtt.rows[a].size() < samples) devices[0]->send_probe(a, s.clocks[0].local(sim.now()));
      sim.run_until(sim.now() + 100 * sync::kNanosPerMs);
    }
    sim.run();
    plan = sync::compensation_plan(rtt);
    out.plan = plan;
  }

  for (std::size_t d = 1; d < count; ++d) net.link(eps[d]).down.loss = s.trigger_loss;
  for (std::size_t d = 1; d < count; ++d) {
    const sync::DeviceRole role = sync::DeviceRole::as_client(d - 1);
    devices[d]->on_trigger([&out, &scheme, &plan, role, d](const sync::TriggerMsg& msg, std::int64_t arrival) {
      record_capture(out, msg.trigger_id, d, sync::capture_instant(scheme, {role, arrival, &plan, 0, std::nullopt}));
    });
  }

  const Nanos start_local = s.clocks[0].local(sim.now()) + 100 * sync::kNanosPerMs;
  out.start_global = s.clocks[0].global(start_local);
  for (const auto& msg : sync::schedule_triggers(s.trigger_hz, s.duration_s)) {
    const Nanos local = start_local + msg.host_send_time;
    const Nanos at = std::max(sim.now(), s.clocks[0].global(local));
    sim.schedule(at, [&, local, id = msg.trigger_id] {
      devices[0]->send_trigger(id, local);
      record_capture(out, id, 0,
                     sync::capture_instant(scheme, {sync::DeviceRole::as_host(), local, &plan, 0, std::nullopt}));
    });
  }
  sim.run();
}

void simulate_ntp(const TimingSetup& s, const sync::SyncScheme& scheme, std::uint64_t seed, TimingResult& out) {
  const std::size_t count = s.clocks.size();
  const Nanos spacing = 20 * sync::kNanosPerMs;
  const sim::LinkModel relay_hop{sync::ns_to_ms(s.relay_processing), 0.0, sim::JitterShape::None, 0.0};
  out.offset_estimates_ns.assign(count, 0.0);
  for (std::size_t d = 1; d < count; ++d) {
    const std::vector<sim::LinkModel> forward{s.links[d].up, relay_hop, s.links[0].down};
    const std::vector<sim::LinkModel> back{s.links[0].up, relay_hop, s.links[d].down};
    Rng rng = make_rng(seed, "ntp", d);
    out.offset_estimates_ns[d] = sync::estimate_ntp_offset(scheme.ntp_request_count, [&](int k) {
      return sim::ntp_exchange(k * spacing, s.clocks[d], s.clocks[0], forward, back, rng);
    });
  }
  const Nanos start_local = s.clocks[0].local(scheme.ntp_request_count * spacing + 500 * sync::kNanosPerMs);
  out.start_global = s.clocks[0].global(start_local);
  for (const auto& msg : sync::schedule_triggers(s.trigger_hz, s.duration_s)) {
    const Nanos agreed = start_local + msg.host_send_time;
    for (std::size_t d = 0; d < count; ++d) {
      const auto role = d == 0 ? sync::DeviceRole::as_host() : sync::DeviceRole::as_client(d - 1);
      record_capture(out, msg.trigger_id, d,
                     sync::capture_instant(scheme, {role, 0, nullptr, agreed, out.offset_estimates_ns[d]}));
    }
  }
}

}  // namespace

TimingSetup timing_setup(const Config& c, std::uint64_t seed) {
  TimingSetup s;
  const auto count = static_cast<std::size_t>(c.devices);
  Rng clock_rng = make_rng(seed, "clocks");
  std::uniform_real_distribution<double> offset(-c.clock.offset_ms * 1e6, c.clock.offset_ms * 1e6);
  std::uniform_real_distribution<double> drift(-c.clock.drift_ppm, c.clock.drift_ppm);
  const sim::JitterShape shape = shape_from(c.network.jitter_shape);
  const double hop_jitter = c.network.jitter_ms / std::sqrt(2.0);
  for (std::size_t d = 0; d < count; ++d) {
    const double o = offset(clock_rng);
    const double p = drift(clock_rng);
    s.clocks.push_back({o, p});
    const bool far = d >= 1 && (d - 1) % 2 == 0;
    const double base = c.network.base_ms + (far ? c.network.asymmetry_ms : 0.0);
    const sim::LinkModel hop{base, hop_jitter, shape, 0.0};
    s.links.push_back({hop, hop});
  }
  s.relay_processing = sync::ms_to_ns(c.network.relay_processing_ms);
  s.trigger_hz = c.trigger_hz;
  s.duration_s = c.duration_s;
  s.rtt_samples = c.rtt_samples;
  s.trigger_loss = c.network.trigger_loss;
  return s;
}

TimingResult simulate_timing(const TimingSetup& setup, const sync::SyncScheme& scheme, std::uint64_t seed) {
  scheme.validate();
  if (setup.clocks.empty() || setup.links.size() != setup.clocks.size())
    fail(ErrorCode::InvalidArgument, "timing setup needs one clock and one link per device");
  TimingResult out;
  out.clocks = setup.clocks;
  out.triggers_sent = static_cast<std::uint32_t>(sync::schedule_triggers(setup.trigger_hz, setup.duration_s).size());
  if (is_relay_variant(scheme))
    simulate_relay(setup, scheme, seed, out);
  else
    simulate_ntp(setup, scheme, seed, out);
  for (auto& [id, devices] : out.captures)
    std::sort(devices.begin(), devices.end(), [](const auto& a, const auto& b) { return a.device < b.device; });
  out.spread = sim::measure_capture_spread(out.captures, out.clocks);
  return out;
}

Scene make_scene(const Config& c, std::uint64_t seed) {
  Scene scene{sim::default_actor(c.actor_hz),
              sim::ring_rig(static_cast<std::size_t>(c.devices), c.rig.radius, c.rig.height, derive_seed(seed, "rig"))};
  for (auto& cam : scene.rig.cameras) {
    cam.motion = c.rig.motion;
    cam.sway_deg = c.rig.sway_deg;
    cam.sway_hz = c.rig.sway_hz;
    cam.shake_deg = c.rig.shake_deg;
    cam.shake_m = c.rig.shake_m;
    cam.shake_hz = c.rig.shake_hz;
  }
  return scene;
}

double SessionResult::mean_completeness() const {
  if (merged.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : merged) sum += m.completeness();
  return sum / static_cast<double>(merged.size());
}

double expected_completeness(std::size_t devices, double loss) {
  if (devices == 0) return 0.0;
  return (1.0 + static_cast<double>(devices - 1) * (1.0 - loss)) / static_cast<double>(devices);
}

namespace {

dataplane::PayloadKind payload_kind(const std::string& name) {
  if (name == "silhouette") return dataplane::PayloadKind::Silhouette;
  if (name == "image") return dataplane::PayloadKind::Image;
  return dataplane::PayloadKind::Joints2D;
}

struct Outgoing {
  Nanos sent = 0;
  std::vector<std::uint8_t> frame;
};

struct Delivery {
  Nanos at = 0;
  std::uint16_t device = 0;
  std::size_t seq = 0;
  const std::vector<std::uint8_t>* frame = nullptr;
};

}  // namespace

SessionResult run_session(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& store_root) {
  validate(c);
  SessionResult out;
  out.scene = make_scene(c, seed);
  out.timing = simulate_timing(timing_setup(c, seed), scheme_from_name(c.scheme, c.ntp_requests), seed);
  const auto& timing = out.timing;
  const auto& actor = out.scene.actor;
  const auto& rig = out.scene.rig;
  const std::size_t count = rig.size();
  const dataplane::PayloadKind kind = payload_kind(c.data.payload);

  auto seconds_at = [&](Nanos global) { return sync::ns_to_seconds(global - timing.start_global); };

  // generation, in trigger then device order so every stream draws deterministically
  std::vector<sim::PoseRandomWalk> walks;
  std::vector<Rng> detector_rngs;
  for (std::size_t d = 0; d < count; ++d) {
    walks.emplace_back(sim::PoseNoise{c.noise.rotation_sigma_deg, c.noise.translation_sigma_m, c.noise.reversion},
                       derive_seed(seed, "pose", d));
    detector_rngs.push_back(make_rng(seed, "detector", d));
  }
  Rng image_rng = make_rng(seed, "image");
  std::vector<std::vector<Outgoing>> outgoing(count);

  for (const auto& [trigger, devices] : timing.captures) {
    for (const auto& capture : devices) {
      const std::size_t d = capture.device;
      const double t = seconds_at(timing.global_time(capture));
      const auto truth = sim::actor_pose_at(t, actor, trigger);
      const auto camera = sim::true_camera(rig, d, t);
      walks[d].step();

      dataplane::CaptureRecord rec;
      rec.device = static_cast<std::uint16_t>(d);
      rec.trigger_id = trigger;
      rec.capture_time_ns = capture.local_time;
      rec.pose = sim::global_transform(rig, d).globalize(walks[d].apply(sim::local_pose(rig, d, t)));
      rec.intrinsics = rig.cameras[d].intrinsics;
      rec.kind = kind;
      switch (kind) {
        case dataplane::PayloadKind::Joints2D: {
          const bool affected = c.noise.affected_cameras < 0 || static_cast<int>(d) < c.noise.affected_cameras;
          const sim::DetectorNoise noise{c.noise.pixel_sigma, affected ? c.noise.miss_rate : 0.0, 1.0};
          rec.payload = dataplane::encode_joints(sim::observe_joints(truth, camera, noise, detector_rngs[d], d));
          break;
        }
        case dataplane::PayloadKind::Silhouette:
          rec.payload = dataplane::encode_silhouette(sim::render_silhouette(sim::actor_capsules(truth, actor), camera));
          break;
        case dataplane::PayloadKind::Image: {
          rec.payload.resize(c.data.image_bytes);
          for (auto& b : rec.payload) b = static_cast<std::uint8_t>(image_rng());
          break;
        }
      }
      dataplane::seal(rec);
      outgoing[d].push_back({timing.global_time(capture), dataplane::encode_frame(dataplane::serialize_record(rec))});
    }
  }

  for (std::uint32_t id : std::views::keys(timing.captures)) {
    const auto& host = timing.captures.at(id);
    if (host.empty() || host.front().device != 0) continue;
    const double t = seconds_at(timing.global_time(host.front()));
    FrameTruth ft{id, t, sim::actor_pose_at(t, actor, id), {}};
    for (std::size_t d = 0; d < count; ++d) ft.cameras.push_back(sim::true_camera(rig, d, t));
    out.truth.emplace(id, std::move(ft));
  }

  // delivery over each device's capped data link
  std::vector<Delivery> deliveries;
  for (std::size_t d = 0; d < count; ++d) {
    auto& q = outgoing[d];
    std::stable_sort(q.begin(), q.end(), [](const Outgoing& a, const Outgoing& b) { return a.sent < b.sent; });
    sim::FluidLink link(c.network.bandwidth_bytes_per_s, sync::ms_to_ns(c.network.data_latency_ms));
    for (const auto& o : q) {
      deliveries.push_back({link.deliver(o.frame.size(), o.sent), static_cast<std::uint16_t>(d), deliveries.size(), &o.frame});
      out.bytes_sent += o.frame.size();
      ++out.records_sent;
    }
  }
  std::sort(deliveries.begin(), deliveries.end(), [](const Delivery& a, const Delivery& b) {
    return std::tie(a.at, a.device, a.seq) < std::tie(b.at, b.device, b.seq);
  });

  std::set<std::uint16_t> expected;
  for (std::size_t d = 0; d < count; ++d) expected.insert(static_cast<std::uint16_t>(d));
  dataplane::Merger merger(expected, {sync::ms_to_ns(c.data.merge_timeout_ms)});
  std::vector<dataplane::FrameDecoder> decoders(count, dataplane::FrameDecoder(dataplane::is_valid_record_body));
  std::vector<dataplane::Verifier> verifiers(count, dataplane::Verifier(actor.joint_count()));
  std::optional<dataplane::Store> store;
  if (store_root) store.emplace(*store_root);

  auto drain = [&] {
    for (auto& m : merger.take()) {
      if (store) store->persist(m);
      out.merged.push_back(std::move(m));
    }
  };
  auto consume = [&](std::size_t d, Nanos at) {
    while (auto body = decoders[d].next()) {
      auto rec = dataplane::deserialize_record(*body);
      if (verifiers[d].verify(rec).verified) {
        ++out.records_verified;
        merger.push(std::move(rec), at);
      } else {
        ++out.records_rejected;
      }
    }
  };
  for (const auto& del : deliveries) {
    decoders[del.device].feed(*del.frame);
    consume(del.device, del.at);
    merger.advance(del.at);
    drain();
  }
  for (std::size_t d = 0; d < count; ++d) {
    decoders[d].finish();
    consume(d, deliveries.empty() ? 0 : deliveries.back().at);
  }
  merger.flush();
  drain();
  out.merge_stats = merger.stats();
  if (store_root) out.persisted = dataplane::Store::list(*store_root);
  return out;
}

namespace {

nlohmann::json truth_line(const FrameTruth& t) {
  nlohmann::json j;
  j["trigger_id"] = t.trigger_id;
  j["time_s"] = t.time_s;
  auto& joints = j["joints"] = nlohmann::json::array();
  for (const auto& p : t.skeleton.joints) joints.push_back({p->x(), p->y(), p->z()});
  auto& cams = j["cameras"] = nlohmann::json::array();
  for (const auto& cam : t.cameras) {
    const auto& r = cam.pose.rotation;
    const auto& x = cam.pose.translation;
    cams.push_back({{"rotation", {r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1), r(2, 2)}},
                    {"translation", {x.x(), x.y(), x.z()}}});
  }
  return j;
}

}  // namespace

SessionRun run_session_experiment(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& out) {
  if (out) {
    claim_output_dir(*out, c, "run");
    std::filesystem::remove_all(*out / "store");  // our own earlier output for this config
  }
  SessionRun run;
  run.session = run_session(c, seed, out ? std::optional(*out / "store") : std::nullopt);
  const auto& s = run.session;
  const std::string hash = config_hash(c);
  const std::size_t count = static_cast<std::size_t>(c.devices);

  CsvTable metrics({"scheme", "devices", "triggers_sent", "merged", "complete", "mean_completeness", "spread_mean_ms",
                    "spread_std_ms", "spread_max_ms", "records_sent", "records_verified", "records_rejected",
                    "bytes_sent", "merge_late", "merge_duplicates"},
                   seed, hash);
  metrics.add({c.scheme, std::int64_t(c.devices), std::int64_t(s.timing.triggers_sent), std::int64_t(s.merged.size()),
               std::int64_t(s.merge_stats.complete), s.mean_completeness(), s.timing.spread.mean_ms,
               s.timing.spread.std_ms, s.timing.spread.max_ms, std::int64_t(s.records_sent),
               std::int64_t(s.records_verified), std::int64_t(s.records_rejected), std::int64_t(s.bytes_sent),
               std::int64_t(s.merge_stats.late), std::int64_t(s.merge_stats.duplicates)});

  CsvTable captures({"trigger_id", "devices_captured", "completeness", "spread_ms"}, seed, hash);
  std::map<std::uint32_t, double> spread_of;
  {
    std::size_t k = 0;
    for (const auto& [id, devs] : s.timing.captures)
      if (devs.size() >= 2 && k < s.timing.spread.per_trigger_ms.size()) spread_of[id] = s.timing.spread.per_trigger_ms[k++];
  }
  for (const auto& m : s.merged)
    captures.add({std::int64_t(m.trigger_id), std::int64_t(m.records.size()), m.completeness(),
                  spread_of.contains(m.trigger_id) ? spread_of.at(m.trigger_id) : 0.0});

  if (out) {
    metrics.write(*out / "session_metrics.csv");
    captures.write(*out / "captures.csv");
    std::ofstream gt(*out / "ground_truth.jsonl", std::ios::trunc);
    for (const auto& t : std::views::values(s.truth)) gt << truth_line(t).dump() << "\n";
    if (!gt) fail(ErrorCode::IoFailure, "cannot write ground_truth.jsonl");
  }

  auto& r = run.report;
  r.experiment = "run";
  r.check("every trigger yields a merged capture", s.merged.size() == s.timing.triggers_sent,
          std::to_string(s.merged.size()) + " of " + std::to_string(s.timing.triggers_sent));
  r.check("no record fails verification", s.records_rejected == 0, std::to_string(s.records_rejected) + " rejected");
  const bool lossy = c.network.trigger_loss > 0.0 && (c.scheme == "trigger_relay" || c.scheme == "no_compensation");
  const double expect = lossy ? expected_completeness(count, c.network.trigger_loss) : 1.0;
  const double tol = lossy ? 0.02 : 0.0;
  r.check("merge completeness", std::abs(s.mean_completeness() - expect) <= tol,
          "mean " + format_cell(s.mean_completeness()) + ", expected " + format_cell(expect));
  if (out) {
    bool consecutive = s.persisted.size() == s.merged.size();
    for (std::size_t i = 0; consecutive && i < s.persisted.size(); ++i) consecutive = s.persisted[i] == i;
    r.check("persisted trigger ids are 0..N-1", consecutive, std::to_string(s.persisted.size()) + " persisted");
  }
  return run;
}

}  // namespace syncap::harness
