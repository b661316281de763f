#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "syncap/common/error.hpp"
#include "syncap/dataplane/store.hpp"
#include "syncap/geometry/pipeline.hpp"
#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/frequency_sweep.hpp"
#include "syncap/harness/missdetection.hpp"
#include "syncap/harness/parallel.hpp"
#include "syncap/harness/reconstruction.hpp"
#include "syncap/harness/session.hpp"
#include "syncap/harness/sync_comparison.hpp"
#include "syncap/harness/volumetric.hpp"
#include "syncap/hull/marching_cubes.hpp"
#include "syncap/sim/actor.hpp"
#include "syncap/sim/observe.hpp"
#include "syncap/sim/rig.hpp"
#include "syncap/sync/trigger.hpp"
#include "temp_dir.hpp"

using namespace syncap;
using namespace syncap::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Config short_noiseless(double duration_s = 1.9) {
  Config c = preset("noiseless");
  c.duration_s = duration_s;
  return c;
}

// Drift-free clocks on whole nanoseconds and symmetric jitter-free links with
// the given per-client base latency (ms).
TimingSetup exact_setup(const std::vector<double>& client_base_ms, std::uint64_t seed) {
  TimingSetup s;
  Rng rng(seed);
  std::uniform_int_distribution<std::int64_t> offset(-50'000'000, 50'000'000);
  auto hop = [](double ms) { return sim::LinkModel{ms, 0.0, sim::JitterShape::None, 0.0}; };
  s.clocks.push_back({static_cast<double>(offset(rng)), 0.0});
  s.links.push_back({hop(5.0), hop(5.0)});
  for (double ms : client_base_ms) {
    s.clocks.push_back({static_cast<double>(offset(rng)), 0.0});
    s.links.push_back({hop(ms), hop(ms)});
  }
  s.relay_processing = sync::ms_to_ns(0.3);
  s.trigger_hz = 10.0;
  s.duration_s = 2.0;
  s.rtt_samples = 5;
  return s;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("presets load and carry the scenario trigger counts") {
    for (const auto& name : preset_names()) CHECK_NOTHROW(validate(load_config(name)));
    CHECK(sync::schedule_triggers(10.0, preset("easy").duration_s).size() == 312);
    CHECK(sync::schedule_triggers(10.0, preset("medium").duration_s).size() == 291);
    CHECK(sync::schedule_triggers(10.0, preset("hard").duration_s).size() == 329);
    CHECK(sync::schedule_triggers(10.0, preset("noiseless").duration_s).size() == 100);
    CHECK_THROWS_AS(preset("extreme"), Error);
  }

  TEST_CASE("JSON overrides a base preset and rejects unknown keys") {
    const auto c = config_from_json(nlohmann::json::parse(R"({"base":"hard","devices":4,"noise":{"pixel_sigma":1.5}})"));
    CHECK(c.devices == 4);
    CHECK(c.noise.pixel_sigma == 1.5);
    CHECK(c.rig.shake_deg == preset("hard").rig.shake_deg);
    try {
      config_from_json(nlohmann::json::parse(R"({"noise":{"pixle_sigma":1}})"));
      FAIL("accepted a misspelled key");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"devices":0})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"scheme":"gps"})")), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"rig":{"motion":"flying"}})")), Error);
  }

  TEST_CASE("hash is stable through a JSON round trip and changes with any field") {
    const Config a = preset("medium");
    CHECK(config_hash(a) == config_hash(config_from_json(to_json(a))));
    CHECK(config_hash(a).size() == 16);
    Config b = a;
    b.freq.record_bytes += 1;
    CHECK(config_hash(a) != config_hash(b));
  }

  TEST_CASE("an output directory refuses a different config or experiment") {
    TempDir dir("cfg");
    const Config a = preset("easy");
    CHECK_NOTHROW(claim_output_dir(dir.path / "out", a, "run"));
    CHECK_NOTHROW(claim_output_dir(dir.path / "out", a, "run"));
    Config b = a;
    b.devices = 3;
    try {
      claim_output_dir(dir.path / "out", b, "run");
      FAIL("accepted a different config");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigMismatch);
    }
    CHECK_THROWS_AS(claim_output_dir(dir.path / "out", a, "volumetric"), Error);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("rows lead with seed and hash, doubles use %.9g") {
    CsvTable t({"name", "value", "count"}, 7, "abc");
    t.add({std::string("x"), 0.1, std::int64_t(3)});
    t.add({std::string("a,b"), 1.0 / 3.0, std::int64_t(-1)});
    CHECK(t.str() == "seed,config_hash,name,value,count\n7,abc,x,0.1,3\n7,abc,\"a,b\",0.333333333,-1\n");
    CHECK_THROWS_AS(t.add({0.5}), Error);
    CHECK(format_cell(std::nan("")) == "nan");
    CHECK(format_cell(1e-12) == "1e-12");
  }
}

TEST_SUITE("harness utilities") {
  TEST_CASE("spearman against hand-computed values") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(spearman(x, std::vector<double>{10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman(x, std::vector<double>{4, 3, 2, 1}) == doctest::Approx(-1.0));
    // ranks of y with a tie: 1, 2.5, 2.5, 4 -> rho = 4.5 / sqrt(5 * 4.5)
    CHECK(spearman(x, std::vector<double>{1, 5, 5, 9}) == doctest::Approx(4.5 / std::sqrt(22.5)));
    CHECK(spearman(x, std::vector<double>{2, 2, 2, 2}) == 0.0);
    // d = (0, 2, -1, -1): 1 - 6 * 6 / (4 * 15) = 0.4
    CHECK(spearman(x, std::vector<double>{1, 4, 2, 3}) == doctest::Approx(0.4));
  }

  TEST_CASE("parallel_map keeps index order and rethrows") {
    const auto v = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(parallel_map(10,
                                 [](std::size_t i) {
                                   if (i == 7) fail(ErrorCode::InvalidArgument, "seven");
                                   return 0;
                                 }),
                    Error);
  }

  TEST_CASE("expected completeness with lossy clients") {
    CHECK(expected_completeness(6, 0.0) == 1.0);
    CHECK(expected_completeness(6, 0.2) == doctest::Approx(5.0 / 6.0));
    CHECK(expected_completeness(1, 0.9) == 1.0);
  }

  TEST_CASE("transport model: one stream never delivers less than per-request HTTP") {
    for (int n : {1, 4, 6})
      for (double hz : {1.0, 10.0, 30.0}) {
        const auto m = transport_model(n, hz, 160000, 5e6, 0.005);
        CHECK(m.http_delivered <= m.stream_delivered);
        CHECK(m.stream_delivered <= 1.0);
      }
    CHECK(transport_model(1, 1.0, 1000, 5e6, 0.005).stream_delivered == 1.0);
    CHECK(transport_model(6, 30.0, 160000, 5e6, 0.005).stream_delivered == doctest::Approx(5e6 / (6 * 30.0 * 160000)));
  }
}

TEST_SUITE("timing") {
  TEST_CASE("relay compensation equalizes capture instants exactly") {
    const auto t = simulate_timing(exact_setup({2.0, 17.5, 9.25, 31.0}, 4), sync::SyncScheme::trigger_relay(), 4);
    REQUIRE(t.triggers_sent == 21);
    REQUIRE(t.captures.size() == 21);
    for (const auto& [id, devs] : t.captures) CHECK(devs.size() == 5);
    CHECK(t.spread.max_ms <= 1e-6);
    REQUIRE(t.plan);
    // the slowest client waits nothing
    CHECK(t.plan->client_delay_ms[3] == doctest::Approx(0.0));
  }

  TEST_CASE("without compensation the spread is the slowest one-way delay") {
    const auto t = simulate_timing(exact_setup({2.0, 17.5}, 5), sync::SyncScheme::no_compensation(), 5);
    // host uplink 5 ms + relay 0.3 ms + slowest downlink 17.5 ms
    for (double s : t.spread.per_trigger_ms) CHECK(s == doctest::Approx(22.8).epsilon(1e-9));
  }

  TEST_CASE("NTP over symmetric paths recovers the offsets") {
    const auto setup = exact_setup({3.0, 12.0}, 6);
    const auto t = simulate_timing(setup, sync::SyncScheme::ntp_averaged(10), 6);
    for (std::size_t d = 1; d < setup.clocks.size(); ++d)
      CHECK(t.offset_estimates_ns[d] == doctest::Approx(setup.clocks[0].offset_ns - setup.clocks[d].offset_ns).epsilon(1e-12));
    CHECK(t.spread.max_ms <= 1e-6);
  }

  TEST_CASE("trigger loss drops client captures at the configured rate") {
    Config c = preset("easy");
    c.network.trigger_loss = 0.3;
    c.duration_s = 99.9;
    const auto t = simulate_timing(timing_setup(c, 8), sync::SyncScheme::trigger_relay(), 8);
    std::size_t client_captures = 0;
    for (const auto& [id, devs] : t.captures) {
      CHECK(devs.front().device == 0);
      client_captures += devs.size() - 1;
    }
    const double kept = static_cast<double>(client_captures) / (5.0 * t.triggers_sent);
    CHECK(kept == doctest::Approx(0.7).epsilon(0.05));
  }

  TEST_CASE("timing is a pure function of setup and seed") {
    Config c = preset("hard");
    c.duration_s = 3.0;
    const auto a = simulate_timing(timing_setup(c, 11), sync::SyncScheme::trigger_relay(), 11);
    const auto b = simulate_timing(timing_setup(c, 11), sync::SyncScheme::trigger_relay(), 11);
    CHECK(a.spread.per_trigger_ms == b.spread.per_trigger_ms);
    const auto other = simulate_timing(timing_setup(c, 12), sync::SyncScheme::trigger_relay(), 12);
    CHECK(a.spread.per_trigger_ms != other.spread.per_trigger_ms);
  }
}

TEST_SUITE("session") {
  TEST_CASE("noiseless session merges every trigger completely") {
    const auto s = run_session(short_noiseless(), 1);
    CHECK(s.timing.triggers_sent == 20);
    CHECK(s.merged.size() == 20);
    CHECK(s.mean_completeness() == 1.0);
    CHECK(s.records_rejected == 0);
    CHECK(s.truth.size() == 20);
    for (std::size_t i = 0; i < s.merged.size(); ++i) CHECK(s.merged[i].trigger_id == i);
  }

  TEST_CASE("recorded poses are the true poses when there is no pose noise") {
    const auto s = run_session(short_noiseless(0.5), 2);
    const auto& m = s.merged.front();
    const auto& truth = s.truth.at(m.trigger_id);
    for (const auto& [device, rec] : m.records) {
      CHECK((rec.pose.rotation - truth.cameras[device].pose.rotation).norm() < 1e-9);
      CHECK((rec.pose.translation - truth.cameras[device].pose.translation).norm() < 1e-9);
    }
  }

  TEST_CASE("frame_input decodes what the detector produced") {
    const auto s = run_session(short_noiseless(0.5), 3);
    const auto in = frame_input(s.merged.front(), 25);
    REQUIRE(in.cameras.size() == 6);
    const auto& truth = s.truth.at(in.trigger_id);
    for (std::size_t c = 0; c < in.cameras.size(); ++c) {
      Rng rng(0);
      const auto expect = sim::observe_joints(truth.skeleton, truth.cameras[c], {}, rng, c);
      for (std::size_t m = 0; m < 25; ++m) {
        REQUIRE(in.observations[c].joints[m].has_value() == expect.joints[m].has_value());
        if (expect.joints[m]) CHECK((in.observations[c].joints[m]->position - expect.joints[m]->position).norm() < 1e-6);
      }
    }
  }

  TEST_CASE("session artifacts are byte-identical across runs") {
    TempDir a("run_a"), b("run_b");
    Config c = preset("hard");
    c.duration_s = 2.0;
    const auto ra = run_session_experiment(c, 21, a.path);
    const auto rb = run_session_experiment(c, 21, b.path);
    CHECK(ra.report.passed());
    for (const char* f : {"session_metrics.csv", "captures.csv", "ground_truth.jsonl", "config.json"})
      CHECK(slurp(a.path / f) == slurp(b.path / f));
    CHECK(dataplane::Store::list(a.path / "store").size() == 21);
  }

  TEST_CASE("rerunning into the same directory replaces the earlier store") {
    TempDir dir("rerun");
    const Config c = short_noiseless(0.9);
    CHECK(run_session_experiment(c, 1, dir.path).report.passed());
    CHECK(run_session_experiment(c, 1, dir.path).report.passed());
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("noiseless reconstruction is exact and both initializations agree") {
    const auto run = run_reconstruction(short_noiseless(), 1);
    CHECK(run.report.passed());
    CHECK(run.mean_reprojection_error() < 1e-6);
    CHECK(run.max_joint_error() < 1e-6);
    CHECK(run.total_invocations(false) == 20);
  }

  TEST_CASE("reconstruction refuses sessions without joints") {
    Config c = short_noiseless();
    c.data.payload = "silhouette";
    CHECK_THROWS_AS(run_reconstruction(c, 1), Error);
  }

  TEST_CASE("a total miss on every camera flags the frame instead of throwing") {
    std::vector<geometry::Skeleton2D> obs;
    const auto scene = make_scene(preset("easy"), 1);
    std::vector<geometry::Camera> cams;
    for (std::size_t d = 0; d < 6; ++d) {
      cams.push_back(sim::true_camera(scene.rig, d, 0.0));
      obs.push_back(geometry::Skeleton2D::missing(25, 0, d));
    }
    const auto rec = geometry::reconstruct_frame(obs, cams);
    CHECK(rec.unresolved);
    CHECK(rec.skeleton.resolved_count() == 0);
  }

  TEST_CASE("small miss-detection sweep: no aborts, error grows with rate") {
    Config c = preset("easy");
    c.missdet.pixel_sigmas = {2.0};
    c.missdet.rates = {0.0, 0.5, 1.0};
    c.missdet.affected = {4};
    c.missdet.seeds = 2;
    c.missdet.frames = 10;
    const auto sweep = run_missdetection_sweep(c, 3);
    CHECK(sweep.report.passed());
    REQUIRE(sweep.points.size() == 3);
    CHECK(sweep.points[0].mean_error_px < sweep.points[2].mean_error_px);
  }

  TEST_CASE("sync comparison CSV is reproducible") {
    Config c = preset("easy");
    c.sync.seeds = 3;
    c.sync.jitter_ms = {0.0, 8.0};
    c.sync.duration_s = 2.0;
    const auto a = run_sync_comparison(c, 5);
    const auto b = run_sync_comparison(c, 5);
    CHECK(a.table.str() == b.table.str());
    CHECK(a.rows.size() == 4 * 2 * 2);
    const auto* none = a.find("no_compensation", 0.0, 2);
    REQUIRE(none);
    // first client is 10 ms farther: 5 + 15 ms one way
    CHECK(none->mean_ms == doctest::Approx(20.0 + preset("easy").network.relay_processing_ms).epsilon(1e-4));
  }

  TEST_CASE("frequency sweep: one device below the cap tracks 1/phi") {
    Config c = preset("easy");
    c.freq.devices = {1};
    c.freq.frequencies_hz = {2.0, 10.0};
    const auto sweep = run_frequency_sweep(c, 1);
    CHECK(sweep.report.passed());
    for (const auto& p : sweep.points) CHECK(p.mean_gap_s == doctest::Approx(1.0 / p.frequency_hz).epsilon(0.02));
  }

  TEST_CASE("coarse volumetric run keeps the actor inside the hull") {
    Config c = short_noiseless(0.2);
    c.volumetric.dims = 96;
    c.volumetric.frames = 1;
    const auto run = run_volumetric(c, 1);
    CHECK(run.report.passed());
    REQUIRE(run.frames.size() == 1);
    CHECK(run.frames[0].interior.violations == 0);
    CHECK(run.frames[0].interior.interior > 0);
  }
}

TEST_SUITE("hull checks") {
  TEST_CASE("ray parity on a meshed voxel block") {
    auto grid = hull::build_grid({0, 0, 0}, {1, 1, 1}, {10, 10, 10});
    for (int k = 3; k <= 6; ++k)
      for (int j = 3; j <= 6; ++j)
        for (int i = 3; i <= 6; ++i) grid.occupancy[grid.index(i, j, k)] = 1;
    const auto mesh = hull::marching_cubes(grid, 1);
    // occupied centers span 0.35..0.65 from the origin corner; the surface sits at 0.3 and 0.7
    const Eigen::Vector3d o = grid.origin;
    const std::vector<Eigen::Vector3d> in{o + Eigen::Vector3d(0.5, 0.5, 0.5), o + Eigen::Vector3d(0.32, 0.5, 0.47),
                                          o + Eigen::Vector3d(0.5, 0.68, 0.51)};
    const std::vector<Eigen::Vector3d> out{o + Eigen::Vector3d(0.28, 0.5, 0.5), o + Eigen::Vector3d(0.5, 0.5, 0.72),
                                           o + Eigen::Vector3d(0.9, 0.1, 0.5)};
    CHECK(fraction_inside(mesh, grid, in) == 1.0);
    CHECK(fraction_inside(mesh, grid, out) == 0.0);
  }

  TEST_CASE("interior check counts a sphere's voxel centers") {
    auto grid = hull::build_grid({0, 0, 0}, {1, 1, 1}, {60, 60, 60});
    const std::vector<sim::Capsule> ball{{{0, 0, 0}, {0, 0, 0}, 0.3}};
    const auto empty = check_interior(grid, ball);
    const double expect = 4.0 / 3.0 * M_PI * 0.027 / grid.voxel_volume();
    CHECK(static_cast<double>(empty.interior) == doctest::Approx(expect).epsilon(0.02));
    CHECK(empty.violations == empty.interior);
    std::fill(grid.occupancy.begin(), grid.occupancy.end(), 1);
    CHECK(check_interior(grid, ball).violations == 0);
  }
}
