#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "syncap/dataplane/merge.hpp"
#include "syncap/harness/config.hpp"
#include "syncap/harness/report.hpp"
#include "syncap/sim/actor.hpp"
#include "syncap/sim/network.hpp"
#include "syncap/sim/rig.hpp"
#include "syncap/sim/spread.hpp"
#include "syncap/sync/capture_instant.hpp"
#include "syncap/sync/clock.hpp"

namespace syncap::harness {

/// Throws ConfigError for an unknown name. `ntp_requests` is used by
/// ntp_averaged only.
sync::SyncScheme scheme_from_name(const std::string& name, int ntp_requests);

/// Everything the trigger path depends on. Device 0 is the host.
struct TimingSetup {
  std::vector<sync::DeviceClock> clocks;
  std::vector<sim::AccessLink> links;
  sync::Nanos relay_processing = 0;
  double trigger_hz = 10.0;
  double duration_s = 10.0;
  int rtt_samples = 20;
  double trigger_loss = 0.0;  // on client downlinks, once the RTTs are measured
};

/// Draws clocks and links from the config. Per hop jitter is
/// jitter_ms / sqrt(2), so the host-to-client one-way delay (two hops) has
/// the configured spread. Even-numbered clients sit asymmetry_ms farther from
/// the relay in both directions.
TimingSetup timing_setup(const Config& config, std::uint64_t seed);

struct TimingResult {
  std::vector<sync::DeviceClock> clocks;
  std::optional<sync::CompensationPlan> plan;
  std::vector<double> offset_estimates_ns;  // NTP schemes; host entry is 0
  std::uint32_t triggers_sent = 0;
  sync::Nanos start_global = 0;  // trigger 0 on the global clock
  std::map<std::uint32_t, std::vector<sim::DeviceCapture>> captures;  // devices in increasing order
  sim::SpreadSummary spread;

  sync::Nanos global_time(const sim::DeviceCapture& c) const { return clocks[c.device].global(c.local_time); }
};

/// Runs the join, RTT measurement and trigger phases through a real relay
/// server and relay clients on the simulated network (relay schemes), or the
/// NTP exchanges plus an agreed schedule (NTP schemes).
TimingResult simulate_timing(const TimingSetup& setup, const sync::SyncScheme& scheme, std::uint64_t seed);

struct Scene {
  sim::ActorModel actor;
  sim::Rig rig;
};

Scene make_scene(const Config& config, std::uint64_t seed);

/// World state at the host's capture instant of one trigger.
struct FrameTruth {
  std::uint32_t trigger_id = 0;
  double time_s = 0.0;
  geometry::Skeleton3D skeleton;
  std::vector<geometry::Camera> cameras;
};

struct SessionResult {
  Scene scene;
  TimingResult timing;
  std::vector<dataplane::MergedCapture> merged;
  std::map<std::uint32_t, FrameTruth> truth;
  dataplane::MergeStats merge_stats;
  std::uint64_t records_sent = 0;
  std::uint64_t records_verified = 0;
  std::uint64_t records_rejected = 0;
  std::uint64_t bytes_sent = 0;
  std::vector<std::uint32_t> persisted;  // trigger ids read back from the store

  double mean_completeness() const;
};

/// End to end: timing, per-device capture and payload generation at the true
/// capture instants, framed delivery over each device's data link, decoding,
/// verification, merge by trigger and (with `store_root`) persistence.
SessionResult run_session(const Config& config, std::uint64_t seed,
                          const std::optional<std::filesystem::path>& store_root = std::nullopt);

struct SessionRun {
  SessionResult session;
  Report report;
};

/// run_session plus its metric tables and assertions. With `out`, writes
/// session_metrics.csv, captures.csv, ground_truth.jsonl and the store.
SessionRun run_session_experiment(const Config& config, std::uint64_t seed,
                                  const std::optional<std::filesystem::path>& out);

/// Expected completeness with independent trigger loss p on each client.
double expected_completeness(std::size_t devices, double loss);

}  // namespace syncap::harness
