#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "syncap/common/error.hpp"
#include "syncap/relay/relay_client.hpp"
#include "syncap/relay/relay_server.hpp"
#include "syncap/sim/actor.hpp"
#include "syncap/sim/network.hpp"
#include "syncap/sim/ntp_exchange.hpp"
#include "syncap/sim/observe.hpp"
#include "syncap/sim/pose_noise.hpp"
#include "syncap/sim/rig.hpp"
#include "syncap/sim/spread.hpp"

using namespace syncap;
using namespace syncap::sim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double max_joint_gap(const geometry::Skeleton3D& a, const geometry::Skeleton3D& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.joints.size(); ++j) worst = std::max(worst, (*a.joints[j] - *b.joints[j]).norm());
  return worst;
}

// Host plus clients wired through a relay on the simulated network.
struct RelayBed {
  Simulator sim;
  SimNetwork net;
  relay::Endpoint relay_ep;
  std::unique_ptr<relay::RelayServer> server;
  std::vector<relay::Endpoint> eps;
  std::vector<std::unique_ptr<relay::RelayClient>> devices;  // [0] is the host

  RelayBed(std::size_t clients, AccessLink host_link, AccessLink client_link, Nanos processing, std::uint64_t seed)
      : net(sim, seed) {
    relay_ep = net.add_relay(processing, nullptr);
    server = std::make_unique<relay::RelayServer>(net.port(relay_ep));
    net.set_receiver(relay_ep, [this](relay::Endpoint from, std::span<const std::uint8_t> b) { server->handle(from, b); });
    for (std::size_t d = 0; d <= clients; ++d) {
      const auto ep = net.add_device(d == 0 ? host_link : client_link, nullptr);
      eps.push_back(ep);
      devices.push_back(std::make_unique<relay::RelayClient>(net.port(ep), relay_ep));
      auto* dev = devices.back().get();
      net.set_receiver(ep, [this, dev](relay::Endpoint, std::span<const std::uint8_t> b) { dev->handle(b, sim.now()); });
    }
    devices[0]->join_as_host();
    sim.run();
    for (std::size_t d = 1; d <= clients; ++d) devices[d]->join(devices[0]->session_id());
    sim.run();
  }
};

}  // namespace

TEST_SUITE("actor") {
  TEST_CASE("t = 0 is the rest pose") {
    const auto moving = actor_pose_at(0.0, default_actor());
    const auto rest = actor_pose_at(0.0, rest_actor());
    REQUIRE(moving.joints.size() == 25);
    CHECK(max_joint_gap(moving, rest) < 1e-12);
    CHECK((*rest.joints[geometry::kMidHipJoint] - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
  }

  TEST_CASE("bone lengths hold at every time") {
    const auto actor = default_actor();
    for (double t : {0.13, 0.7, 1.9, 5.55}) {
      const auto pose = actor_pose_at(t, actor);
      for (std::size_t j = 0; j < 25; ++j) {
        if (actor.parent[j] == kNoParent) continue;
        const double len = (*pose.joints[j] - *pose.joints[actor.parent[j]]).norm();
        CHECK(len == doctest::Approx(actor.bone_length(j)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("motion is periodic in 1/f0") {
    const auto actor = default_actor(0.5);
    for (double t : {0.0, 0.3, 1.1}) CHECK(max_joint_gap(actor_pose_at(t, actor), actor_pose_at(t + actor.period(), actor)) < 1e-9);
    CHECK(max_joint_gap(actor_pose_at(0.5, actor), actor_pose_at(0.0, actor)) > 0.05);
  }

  TEST_CASE("validate rejects broken trees") {
    auto a = rest_actor();
    CHECK_NOTHROW(a.validate());
    a.parent[geometry::kMidHipJoint] = 1;  // Neck is MidHip's child: cycle
    CHECK_THROWS_AS(a.validate(), Error);
    auto b = default_actor();
    b.script.push_back({geometry::kMidHipJoint, Eigen::Vector3d::UnitX(), 0.1});
    CHECK_THROWS_AS(b.validate(), Error);
  }

  TEST_CASE("capsule samples lie on their capsules") {
    const auto actor = default_actor();
    const auto caps = actor_capsules(actor_pose_at(0.4, actor), actor);
    CHECK(caps.size() == 24);
    for (const auto& c : caps)
      for (const auto& p : capsule_samples({c}, 32)) CHECK(segment_distance(p, c.a, c.b) <= c.radius + 1e-12);
  }

  TEST_CASE("actor stays inside every camera's frame") {
    const auto actor = default_actor();
    auto rig = ring_rig(6);
    for (auto& c : rig.cameras) {
      c.motion = MotionClass::Moving;
      c.sway_deg = 10.0;
      c.shake_deg = 1.0;
      c.shake_m = 0.02;
    }
    for (double t = 0.0; t < 2.0 * actor.period(); t += 0.1) {
      const auto pose = actor_pose_at(t, actor);
      for (std::size_t c = 0; c < rig.size(); ++c) {
        const auto cam = true_camera(rig, c, t);
        for (const auto& j : pose.joints) {
          const auto px = geometry::try_project(*j, cam);
          REQUIRE(px);
          CHECK(px->x() >= 0.0);
          CHECK(px->x() < 640.0);
          CHECK(px->y() >= 0.0);
          CHECK(px->y() < 480.0);
        }
      }
    }
  }
}

TEST_SUITE("rig") {
  TEST_CASE("static camera looks at the target") {
    const auto rig = ring_rig(4);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto cam = true_camera(rig, c, 3.0);
      const auto px = geometry::project(rig.target, cam);
      CHECK(px.x() == doctest::Approx(320.0));
      CHECK(px.y() == doctest::Approx(240.0));
      CHECK(cam.pose == true_pose(rig, c, 0.0));
      const auto want = oracle::ring_camera(90.0 * static_cast<double>(c), 4.0, 1.5, rig.target);
      CHECK((cam.pose.translation - want.pose.translation).norm() < 1e-12);
      CHECK((cam.pose.rotation - want.pose.rotation).norm() < 1e-12);
    }
  }

  TEST_CASE("local pose starts at identity and globalizes back") {
    auto rig = ring_rig(3, 4.0, 1.5, 9);
    for (auto& c : rig.cameras) {
      c.motion = MotionClass::Moving;
      c.sway_deg = 15.0;
      c.shake_deg = 2.0;
      c.shake_m = 0.03;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const auto p0 = local_pose(rig, c, 0.0);
      CHECK((p0.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
      CHECK(p0.translation.norm() < 1e-12);
      const auto t = global_transform(rig, c);
      const auto back = t.globalize(local_pose(rig, c, 2.3));
      const auto truth = true_pose(rig, c, 2.3);
      CHECK((back.rotation - truth.rotation).norm() < 1e-12);
      CHECK((back.translation - truth.translation).norm() < 1e-12);
      CHECK((truth.translation - true_pose(rig, c, 0.0).translation).norm() > 0.01);
      CHECK(geometry::is_rotation(truth.rotation));
    }
  }
}

TEST_SUITE("pose noise") {
  TEST_CASE("per-step rotation increments have the configured spread") {
    PoseRandomWalk walk({1.0, 0.0, 0.0}, 17);
    Eigen::Matrix3d prev = Eigen::Matrix3d::Identity();
    double sum_sq = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      walk.step();
      const Eigen::Matrix3d cur = exp_so3(walk.rotation_vector());
      sum_sq += std::pow(log_so3(cur * prev.transpose()).norm(), 2);
      prev = cur;
    }
    const double rms_deg = std::sqrt(sum_sq / n) / kDeg;
    CHECK(rms_deg == doctest::Approx(1.0).epsilon(0.10));
  }

  TEST_CASE("noisy poses stay orthonormal after long walks") {
    PoseRandomWalk walk({0.5, 0.01, 0.0}, 3);
    const geometry::Pose base{oracle::look_at({4, 0, 1.5}, {0, 0, 1}), {4, 0, 1.5}};
    for (int i = 0; i < 10000; ++i) walk.step();
    const auto noisy = walk.apply(base);
    CHECK(geometry::orthonormality_error(noisy.rotation) < 1e-12);
    CHECK(noisy.rotation.determinant() == doctest::Approx(1.0));
  }

  TEST_CASE("mean reversion bounds the drift") {
    PoseRandomWalk free({0.2, 0.0, 0.0}, 5), pulled({0.2, 0.0, 0.2}, 5);
    double free_max = 0.0, pulled_max = 0.0;
    for (int i = 0; i < 20000; ++i) {
      free.step();
      pulled.step();
      free_max = std::max(free_max, free.rotation_vector().norm());
      pulled_max = std::max(pulled_max, pulled.rotation_vector().norm());
    }
    CHECK(pulled_max < free_max);
    CHECK(pulled_max / kDeg < 3.0);
  }

  TEST_CASE("zero noise leaves poses untouched, same seed same walk") {
    PoseRandomWalk zero({0.0, 0.0, 0.0}, 1);
    zero.step();
    const geometry::Pose p{oracle::look_at({0, 4, 1.5}, {0, 0, 1}), {0, 4, 1.5}};
    CHECK((zero.apply(p).rotation - p.rotation).norm() < 1e-15);
    PoseRandomWalk a({0.3, 0.01, 0.1}, 77), b({0.3, 0.01, 0.1}, 77);
    for (int i = 0; i < 100; ++i) {
      a.step();
      b.step();
    }
    CHECK(a.rotation_vector() == b.rotation_vector());
    CHECK(a.translation() == b.translation());
  }
}

TEST_SUITE("detector") {
  TEST_CASE("pixel noise has the configured standard deviation") {
    const auto actor = default_actor();
    const auto rig = ring_rig(4);
    Rng rng(11);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (int f = 0; f < 400; ++f) {
      const auto truth = actor_pose_at(0.05 * f, actor, f);
      const auto cam = true_camera(rig, f % 4, 0.0);
      const auto obs = observe_joints(truth, cam, {2.0, 0.0}, rng);
      for (std::size_t m = 0; m < 25; ++m) {
        REQUIRE(obs.joints[m]);
        const Eigen::Vector2d d = obs.joints[m]->position - oracle::project(*truth.joints[m], cam);
        sum += d.x() + d.y();
        sum_sq += d.squaredNorm();
        n += 2;
      }
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(sd == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("miss-detection drops the whole actor") {
    const auto truth = actor_pose_at(0.0, default_actor());
    const auto cam = true_camera(ring_rig(2), 0, 0.0);
    Rng rng(2);
    CHECK(observe_joints(truth, cam, {1.0, 1.0}, rng).present_count() == 0);
    int misses = 0;
    for (int i = 0; i < 10000; ++i) misses += observe_joints(truth, cam, {0.0, 0.3}, rng).present_count() == 0;
    CHECK(misses / 10000.0 == doctest::Approx(0.3).epsilon(0.07));
  }

  TEST_CASE("joints outside the frame or behind the camera are missing") {
    geometry::Skeleton3D truth;
    truth.joints = {Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, 1) + Eigen::Vector3d(0, 5, 0),
                    Eigen::Vector3d(8, 0, 1)};
    const auto cam = oracle::ring_camera(0.0, 4.0, 1.0, {0, 0, 1});
    Rng rng(1);
    const auto obs = observe_joints(truth, cam, {0.0, 0.0}, rng, 3);
    CHECK(obs.camera == 3);
    CHECK(obs.joints[0]);
    CHECK_FALSE(obs.joints[1]);
    CHECK_FALSE(obs.joints[2]);
  }

  TEST_CASE("same seed gives identical detections") {
    const auto truth = actor_pose_at(0.7, default_actor());
    const auto cam = true_camera(ring_rig(3), 1, 0.0);
    Rng a(99), b(99);
    for (int i = 0; i < 50; ++i) {
      const auto x = observe_joints(truth, cam, {1.5, 0.2}, a);
      const auto y = observe_joints(truth, cam, {1.5, 0.2}, b);
      for (std::size_t m = 0; m < 25; ++m) {
        REQUIRE(x.joints[m].has_value() == y.joints[m].has_value());
        if (x.joints[m]) CHECK(x.joints[m]->position == y.joints[m]->position);
      }
    }
  }
}

TEST_SUITE("silhouette") {
  const Capsule kPole{{0, 0, 0.6}, {0, 0, 1.4}, 0.15};

  TEST_CASE("doubling the distance quarters the area") {
    const auto near = render_silhouette({kPole}, oracle::ring_camera(0.0, 3.0, 1.0, {0, 0, 1}));
    const auto far = render_silhouette({kPole}, oracle::ring_camera(0.0, 6.0, 1.0, {0, 0, 1}));
    REQUIRE(far.count() > 0);
    const double ratio = static_cast<double>(near.count()) / static_cast<double>(far.count());
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.10));
  }

  TEST_CASE("centered vertical capsule renders a left-right symmetric mask") {
    const auto m = render_silhouette({kPole}, oracle::ring_camera(30.0, 4.0, 1.0, {0, 0, 1}));
    REQUIRE(m.count() > 100);
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) REQUIRE(m.at(x, y) == m.at(m.width - 1 - x, y));
  }

  TEST_CASE("every capsule point lands on a set pixel") {
    const auto actor = default_actor();
    const auto rig = ring_rig(5, 4.0, 1.5, 4);
    for (double t : {0.0, 0.6, 1.3}) {
      const auto caps = actor_capsules(actor_pose_at(t, actor), actor);
      const auto samples = capsule_samples(caps, 96);
      for (std::size_t c = 0; c < rig.size(); ++c) {
        const auto cam = true_camera(rig, c, t);
        const auto mask = render_silhouette(caps, cam);
        std::size_t misses = 0;
        for (const auto& p : samples) {
          const auto px = geometry::project(p, cam);
          const int u = static_cast<int>(std::floor(px.x())), v = static_cast<int>(std::floor(px.y()));
          if (!mask.contains(u, v) || !mask.at(u, v)) ++misses;
        }
        CHECK(misses == 0);
      }
    }
  }

  TEST_CASE("nothing in view renders an empty mask") {
    const auto cam = oracle::ring_camera(0.0, 4.0, 1.0, {0, 0, 1});
    CHECK(render_silhouette({}, cam).count() == 0);
    const Capsule behind{{8, 0, 0.8}, {8, 0, 1.2}, 0.1};
    CHECK(render_silhouette({behind}, cam).count() == 0);
  }
}

TEST_SUITE("network") {
  TEST_CASE("events run in time order, ties in scheduling order") {
    Simulator sim;
    std::vector<int> order;
    sim.schedule(30, [&] { order.push_back(3); });
    sim.schedule(10, [&] { order.push_back(1); });
    sim.schedule(10, [&] {
      order.push_back(2);
      sim.after(5, [&] { order.push_back(25); });
    });
    sim.run_until(20);
    CHECK(order == std::vector<int>{1, 2, 25});
    CHECK(sim.now() == 20);
    sim.run();
    CHECK(order.back() == 3);
    CHECK_THROWS_AS(sim.schedule(5, [] {}), Error);
  }

  TEST_CASE("delay distribution: loss rate and lognormal moments") {
    Rng rng(4);
    const LinkModel link{5.0, 8.0, JitterShape::LogNormal, 0.1};
    int lost = 0;
    double sum = 0.0, sum_sq = 0.0;
    int n = 0;
    for (int i = 0; i < 200000; ++i) {
      const auto at = network_deliver(0, link, rng);
      if (!at) {
        ++lost;
        continue;
      }
      const double j = sync::ns_to_ms(*at) - 5.0;
      CHECK(j >= 0.0);
      sum += j;
      sum_sq += j * j;
      ++n;
    }
    const double mean = sum / n;
    CHECK(lost / 200000.0 == doctest::Approx(0.1).epsilon(0.05));
    CHECK(mean == doctest::Approx(8.0).epsilon(0.03));
    CHECK(std::sqrt(sum_sq / n - mean * mean) == doctest::Approx(8.0).epsilon(0.05));
  }

  TEST_CASE("fixed 5 ms hops give a 20 ms relayed round trip") {
    const AccessLink link{{5.0, 0.0, JitterShape::None, 0.0}, {5.0, 0.0, JitterShape::None, 0.0}};
    RelayBed bed(2, link, link, 0, 1);
    REQUIRE(bed.devices[0]->is_host());
    REQUIRE(bed.devices[1]->index() == 0u);
    std::vector<std::int64_t> rtts;
    bed.devices[0]->on_echo([&](std::uint32_t, std::int64_t rtt) { rtts.push_back(rtt); });
    bed.devices[0]->send_probe(0, bed.sim.now());
    bed.devices[0]->send_probe(1, bed.sim.now());
    bed.sim.run();
    REQUIRE(rtts.size() == 2);
    for (auto r : rtts) CHECK(r == sync::ms_to_ns(20.0));
  }

  TEST_CASE("zero-latency links leave only the relay's processing time") {
    const AccessLink zero{{0.0, 0.0, JitterShape::None, 0.0}, {0.0, 0.0, JitterShape::None, 0.0}};
    RelayBed bed(1, zero, zero, sync::ms_to_ns(0.4), 2);
    std::int64_t rtt = -1;
    bed.devices[0]->on_echo([&](std::uint32_t, std::int64_t r) { rtt = r; });
    bed.devices[0]->send_probe(0, bed.sim.now());
    bed.sim.run();
    CHECK(rtt == 2 * sync::ms_to_ns(0.4));
  }

  TEST_CASE("downlink loss p delivers 1 - p of the triggers") {
    const double p = 0.15;
    const AccessLink clean{{2.0, 0.0, JitterShape::None, 0.0}, {2.0, 0.0, JitterShape::None, 0.0}};
    const AccessLink lossy{{2.0, 0.0, JitterShape::None, 0.0}, {2.0, 1.0, JitterShape::LogNormal, p}};
    RelayBed bed(3, clean, lossy, 0, 8);
    std::vector<int> got(4, 0);
    for (std::size_t d = 1; d < 4; ++d)
      bed.devices[d]->on_trigger([&got, d](const sync::TriggerMsg&, std::int64_t) { ++got[d]; });
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      bed.sim.schedule(bed.sim.now() + sync::ms_to_ns(100.0) * k, [&bed, k] {
        bed.devices[0]->send_trigger(static_cast<std::uint32_t>(k), bed.sim.now());
      });
    }
    bed.sim.run();
    for (std::size_t d = 1; d < 4; ++d) CHECK(got[d] / double(n) == doctest::Approx(1.0 - p).epsilon(0.02));
    CHECK(bed.server->stats().forwarded == 3u * n);
  }

  TEST_CASE("fluid link: under the cap each burst leaves at line rate") {
    FluidLink link(1e6, sync::ms_to_ns(2.0));
    CHECK(link.deliver(1000, 0) == sync::ms_to_ns(3.0));
    CHECK(link.deliver(1000, sync::ms_to_ns(10.0)) == sync::ms_to_ns(13.0));
    CHECK(link.backlog(sync::ms_to_ns(10.5)) == doctest::Approx(500.0));
    CHECK(link.delivered_bytes(sync::ms_to_ns(12.0)) == 1000u);
  }

  TEST_CASE("fluid link: over the cap the backlog grows linearly") {
    FluidLink link(1e6, 0);
    std::vector<double> backlog;
    // 2 MB/s offered into 1 MB/s
    for (int k = 0; k < 100; ++k) {
      link.deliver(20000, sync::ms_to_ns(10.0) * k);
      backlog.push_back(link.backlog(sync::ms_to_ns(10.0) * k));
    }
    for (std::size_t k = 1; k < backlog.size(); ++k) CHECK(backlog[k] > backlog[k - 1]);
    CHECK(backlog[99] == doctest::Approx(20000.0 + 99 * 10000.0).epsilon(1e-6));
  }

  TEST_CASE("same seed, same deliveries") {
    auto run = [](std::uint64_t seed) {
      const AccessLink link{{3.0, 4.0, JitterShape::LogNormal, 0.1}, {3.0, 4.0, JitterShape::LogNormal, 0.1}};
      RelayBed bed(2, link, link, sync::ms_to_ns(0.2), seed);
      std::vector<std::int64_t> arrivals;
      bed.devices[1]->on_trigger([&](const sync::TriggerMsg&, std::int64_t at) { arrivals.push_back(at); });
      for (int k = 0; k < 200; ++k)
        bed.sim.schedule(bed.sim.now() + sync::ms_to_ns(50.0) * k,
                         [&bed, k] { bed.devices[0]->send_trigger(static_cast<std::uint32_t>(k), bed.sim.now()); });
      bed.sim.run();
      return arrivals;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
  }
}

TEST_SUITE("spread and ntp") {
  TEST_CASE("spread maps local instants through each clock") {
    const std::vector<sync::DeviceClock> clocks{{0.0, 0.0}, {2e6, 0.0}, {-1e6, 0.0}};
    std::map<std::uint32_t, std::vector<DeviceCapture>> caps;
    // all three at global 100 ms
    caps[0] = {{0, sync::ms_to_ns(100)}, {1, sync::ms_to_ns(102)}, {2, sync::ms_to_ns(99)}};
    // device 1 late by 3 ms
    caps[1] = {{0, sync::ms_to_ns(200)}, {1, sync::ms_to_ns(205)}, {2, sync::ms_to_ns(199)}};
    caps[2] = {{0, 0}};
    const auto s = measure_capture_spread(caps, clocks);
    REQUIRE(s.per_trigger_ms.size() == 2);
    CHECK(s.per_trigger_ms[0] == doctest::Approx(0.0));
    CHECK(s.per_trigger_ms[1] == doctest::Approx(3.0));
    CHECK(s.mean_ms == doctest::Approx(1.5));
    CHECK(s.std_ms == doctest::Approx(1.5));
    CHECK(s.max_ms == doctest::Approx(3.0));
  }

  TEST_CASE("symmetric exchange recovers the offset exactly") {
    const sync::DeviceClock client{-7.5e6, 0.0}, server{0.0, 0.0};
    const LinkModel hop{4.0, 0.0, JitterShape::None, 0.0};
    Rng rng(1);
    const auto ts = ntp_exchange(sync::seconds_to_ns(1.0), client, server, hop, hop, rng);
    CHECK(sync::ntp_offset(ts) == doctest::Approx(7.5e6));
    CHECK(sync::ntp_round_trip(ts) == sync::ms_to_ns(8.0));
  }

  TEST_CASE("asymmetric delays bias the estimate by half the difference") {
    const sync::DeviceClock client{0.0, 0.0}, server{0.0, 0.0};
    Rng rng(1);
    const auto ts = ntp_exchange(0, client, server, {8.0, 0.0, JitterShape::None, 0.0},
                                 {2.0, 0.0, JitterShape::None, 0.0}, rng);
    CHECK(sync::ntp_offset(ts) == doctest::Approx(3e6));
  }
}
