#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "syncap/sim/rig.hpp"

namespace syncap::harness {

struct RigConfig {
  double radius = 4.0;
  double height = 1.5;
  sim::MotionClass motion = sim::MotionClass::Static;
  double sway_deg = 0.0;
  double sway_hz = 0.1;
  double shake_deg = 0.0;
  double shake_m = 0.0;
  double shake_hz = 1.5;
};

struct NoiseConfig {
  double pixel_sigma = 0.0;
  double miss_rate = 0.0;
  int affected_cameras = -1;  // cameras subject to miss_rate; -1 for all
  double rotation_sigma_deg = 0.0;
  double translation_sigma_m = 0.0;
  double reversion = 0.2;
};

struct ClockConfig {
  double offset_ms = 50.0;  // offsets uniform in [-offset, offset]
  double drift_ppm = 20.0;  // drifts uniform in [-drift, drift]
};

struct NetworkConfig {
  double base_ms = 5.0;     // per hop, device <-> relay
  double jitter_ms = 0.0;   // std of the one-way host -> client delay
  std::string jitter_shape = "lognormal";
  double trigger_loss = 0.0;  // on each client's downlink
  double asymmetry_ms = 0.0;  // extra per-hop latency on odd-numbered clients
  double relay_processing_ms = 0.0;
  double data_latency_ms = 5.0;
  double bandwidth_bytes_per_s = 50e6;
};

struct DataConfig {
  std::string payload = "joints";  // joints | silhouette | image
  std::size_t image_bytes = 0;
  double merge_timeout_ms = 500.0;
};

struct ReconstructionConfig {
  std::string mode = "points";  // points | points_and_cameras
  double pair_min_deg = 20.0;
  double pair_max_deg = 160.0;
  double min_confidence = 0.1;
};

struct SyncExperimentConfig {
  std::vector<std::string> schemes{"trigger_relay", "ntp_baseline", "ntp_averaged", "no_compensation"};
  std::vector<double> jitter_ms{0.0, 4.0, 8.0, 16.0};
  std::vector<int> devices{2, 6};
  int asserted_devices = 2;
  double asymmetry_ms = 10.0;
  int seeds = 50;
  double duration_s = 10.0;
};

struct FrequencyExperimentConfig {
  std::vector<double> frequencies_hz{1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0};
  std::vector<int> devices{1, 2, 4, 6};
  double cap_bytes_per_s = 5e6;
  std::size_t record_bytes = 160000;
  double duration_s = 10.0;
  double window_s = 5.0;
  double latency_ms = 5.0;
  double jitter_ms = 1.0;
};

struct MissDetectionExperimentConfig {
  std::vector<double> rates{0.0, 0.2, 0.4, 0.6};
  std::vector<int> affected;  // empty: 1 .. C-2
  std::vector<double> pixel_sigmas{0.0, 1.0, 2.0, 4.0};
  int seeds = 5;
  int frames = 100;
};

struct VolumetricExperimentConfig {
  std::vector<int> thresholds;  // empty: C-2 .. C
  int dims = 160;
  int frames = 4;
  double pose_noise_deg = 1.0;
  int mesh_threshold = 0;  // 0: C
};

struct Config {
  std::string name = "custom";
  int devices = 6;
  double trigger_hz = 10.0;
  double duration_s = 10.0;
  std::string scheme = "trigger_relay";
  int rtt_samples = 20;
  int ntp_requests = 50;
  double actor_hz = 0.5;
  RigConfig rig;
  NoiseConfig noise;
  ClockConfig clock;
  NetworkConfig network;
  DataConfig data;
  ReconstructionConfig reconstruction;
  SyncExperimentConfig sync;
  FrequencyExperimentConfig freq;
  MissDetectionExperimentConfig missdet;
  VolumetricExperimentConfig volumetric;
};

/// Throws ConfigError for out-of-range values.
void validate(const Config& config);

/// Built-in scenarios: easy, medium, hard (static / moving / moving with
/// shake, as in the 4DM classes) and noiseless.
Config preset(std::string_view name);
std::vector<std::string> preset_names();

/// A preset name, or a JSON file. A file may name a preset in "base" and
/// override any field; unknown keys are rejected with ConfigError.
Config load_config(const std::string& name_or_path);
Config config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Config& config);

/// 16 hex digits of FNV-1a over the canonical JSON of the resolved config.
std::string config_hash(const Config& config);

/// Creates `dir` and writes config.json there. If the directory already
/// holds a config.json for a different config or experiment, throws
/// ConfigMismatch instead of mixing outputs.
void claim_output_dir(const std::filesystem::path& dir, const Config& config, std::string_view experiment);

}  // namespace syncap::harness
