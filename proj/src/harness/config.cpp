#include "syncap/harness/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>

#include "syncap/common/error.hpp"
#include "syncap/common/rng.hpp"

namespace syncap::harness {

using nlohmann::json;

namespace {

// Reads fields from a JSON object, refusing keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::ConfigError, where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key)) fail(ErrorCode::ConfigError, "unknown key " + where_ + "." + key);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string motion_name(sim::MotionClass m) { return m == sim::MotionClass::Static ? "static" : "moving"; }

sim::MotionClass motion_from(const std::string& s) {
  if (s == "static") return sim::MotionClass::Static;
  if (s == "moving") return sim::MotionClass::Moving;
  fail(ErrorCode::ConfigError, "rig.motion must be static or moving");
}

void apply(const json& j, Config& c) {
  Reader r(j, "config");
  std::string base;
  r.get("base", base);
  r.get("name", c.name);
  r.get("devices", c.devices);
  r.get("trigger_hz", c.trigger_hz);
  r.get("duration_s", c.duration_s);
  r.get("scheme", c.scheme);
  r.get("rtt_samples", c.rtt_samples);
  r.get("ntp_requests", c.ntp_requests);
  r.get("actor_hz", c.actor_hz);
  if (const json* s = r.child("rig")) {
    Reader q(*s, "rig");
    std::string motion = motion_name(c.rig.motion);
    q.get("radius", c.rig.radius);
    q.get("height", c.rig.height);
    q.get("motion", motion);
    q.get("sway_deg", c.rig.sway_deg);
    q.get("sway_hz", c.rig.sway_hz);
    q.get("shake_deg", c.rig.shake_deg);
    q.get("shake_m", c.rig.shake_m);
    q.get("shake_hz", c.rig.shake_hz);
    q.finish();
    c.rig.motion = motion_from(motion);
  }
  if (const json* s = r.child("noise")) {
    Reader q(*s, "noise");
    q.get("pixel_sigma", c.noise.pixel_sigma);
    q.get("miss_rate", c.noise.miss_rate);
    q.get("affected_cameras", c.noise.affected_cameras);
    q.get("rotation_sigma_deg", c.noise.rotation_sigma_deg);
    q.get("translation_sigma_m", c.noise.translation_sigma_m);
    q.get("reversion", c.noise.reversion);
    q.finish();
  }
  if (const json* s = r.child("clock")) {
    Reader q(*s, "clock");
    q.get("offset_ms", c.clock.offset_ms);
    q.get("drift_ppm", c.clock.drift_ppm);
    q.finish();
  }
  if (const json* s = r.child("network")) {
    Reader q(*s, "network");
    q.get("base_ms", c.network.base_ms);
    q.get("jitter_ms", c.network.jitter_ms);
    q.get("jitter_shape", c.network.jitter_shape);
    q.get("trigger_loss", c.network.trigger_loss);
    q.get("asymmetry_ms", c.network.asymmetry_ms);
    q.get("relay_processing_ms", c.network.relay_processing_ms);
    q.get("data_latency_ms", c.network.data_latency_ms);
    q.get("bandwidth_bytes_per_s", c.network.bandwidth_bytes_per_s);
    q.finish();
  }
  if (const json* s = r.child("data")) {
    Reader q(*s, "data");
    q.get("payload", c.data.payload);
    q.get("image_bytes", c.data.image_bytes);
    q.get("merge_timeout_ms", c.data.merge_timeout_ms);
    q.finish();
  }
  if (const json* s = r.child("reconstruction")) {
    Reader q(*s, "reconstruction");
    q.get("mode", c.reconstruction.mode);
    q.get("pair_min_deg", c.reconstruction.pair_min_deg);
    q.get("pair_max_deg", c.reconstruction.pair_max_deg);
    q.get("min_confidence", c.reconstruction.min_confidence);
    q.finish();
  }
  if (const json* s = r.child("sync")) {
    Reader q(*s, "sync");
    q.get("schemes", c.sync.schemes);
    q.get("jitter_ms", c.sync.jitter_ms);
    q.get("devices", c.sync.devices);
    q.get("asserted_devices", c.sync.asserted_devices);
    q.get("asymmetry_ms", c.sync.asymmetry_ms);
    q.get("seeds", c.sync.seeds);
    q.get("duration_s", c.sync.duration_s);
    q.finish();
  }
  if (const json* s = r.child("freq")) {
    Reader q(*s, "freq");
    q.get("frequencies_hz", c.freq.frequencies_hz);
    q.get("devices", c.freq.devices);
    q.get("cap_bytes_per_s", c.freq.cap_bytes_per_s);
    q.get("record_bytes", c.freq.record_bytes);
    q.get("duration_s", c.freq.duration_s);
    q.get("window_s", c.freq.window_s);
    q.get("latency_ms", c.freq.latency_ms);
    q.get("jitter_ms", c.freq.jitter_ms);
    q.finish();
  }
  if (const json* s = r.child("missdet")) {
    Reader q(*s, "missdet");
    q.get("rates", c.missdet.rates);
    q.get("affected", c.missdet.affected);
    q.get("pixel_sigmas", c.missdet.pixel_sigmas);
    q.get("seeds", c.missdet.seeds);
    q.get("frames", c.missdet.frames);
    q.finish();
  }
  if (const json* s = r.child("volumetric")) {
    Reader q(*s, "volumetric");
    q.get("thresholds", c.volumetric.thresholds);
    q.get("dims", c.volumetric.dims);
    q.get("frames", c.volumetric.frames);
    q.get("pose_noise_deg", c.volumetric.pose_noise_deg);
    q.get("mesh_threshold", c.volumetric.mesh_threshold);
    q.finish();
  }
  r.finish();
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::ConfigError, what);
}

bool known_scheme(const std::string& s) {
  return s == "trigger_relay" || s == "ntp_baseline" || s == "ntp_averaged" || s == "no_compensation";
}

}  // namespace

void validate(const Config& c) {
  require(c.devices >= 1 && c.devices <= 64, "devices must lie in [1, 64]");
  require(c.trigger_hz > 0.0, "trigger_hz must be positive");
  require(c.duration_s >= 0.0, "duration_s must be non-negative");
  require(known_scheme(c.scheme), "unknown scheme " + c.scheme);
  require(c.rtt_samples >= 1, "rtt_samples must be at least 1");
  require(c.ntp_requests >= 1, "ntp_requests must be at least 1");
  require(c.actor_hz > 0.0, "actor_hz must be positive");
  require(c.rig.radius > 0.0, "rig.radius must be positive");
  require(c.noise.pixel_sigma >= 0.0 && c.noise.rotation_sigma_deg >= 0.0 && c.noise.translation_sigma_m >= 0.0,
          "noise sigmas must be non-negative");
  require(c.noise.miss_rate >= 0.0 && c.noise.miss_rate <= 1.0, "noise.miss_rate must lie in [0, 1]");
  require(c.noise.reversion >= 0.0 && c.noise.reversion <= 1.0, "noise.reversion must lie in [0, 1]");
  require(c.clock.offset_ms >= 0.0 && c.clock.drift_ppm >= 0.0, "clock ranges must be non-negative");
  require(c.network.base_ms >= 0.0 && c.network.jitter_ms >= 0.0, "network delays must be non-negative");
  require(c.network.jitter_shape == "lognormal" || c.network.jitter_shape == "normal" ||
              c.network.jitter_shape == "none",
          "network.jitter_shape must be lognormal, normal or none");
  require(c.network.trigger_loss >= 0.0 && c.network.trigger_loss <= 1.0, "network.trigger_loss must lie in [0, 1]");
  require(c.network.bandwidth_bytes_per_s > 0.0, "network.bandwidth_bytes_per_s must be positive");
  require(c.data.payload == "joints" || c.data.payload == "silhouette" || c.data.payload == "image",
          "data.payload must be joints, silhouette or image");
  require(c.reconstruction.mode == "points" || c.reconstruction.mode == "points_and_cameras",
          "reconstruction.mode must be points or points_and_cameras");
  require(c.sync.seeds >= 1 && c.missdet.seeds >= 1, "seed counts must be at least 1");
  require(!c.sync.schemes.empty() && c.sync.schemes.size() >= 2, "sync.schemes needs at least two schemes");
  for (const auto& s : c.sync.schemes) require(known_scheme(s), "unknown scheme " + s);
  require(c.freq.cap_bytes_per_s > 0.0, "freq.cap_bytes_per_s must be positive");
  for (double f : c.freq.frequencies_hz) require(f > 0.0, "freq.frequencies_hz must be positive");
  for (double r : c.missdet.rates) require(r >= 0.0 && r <= 1.0, "missdet.rates must lie in [0, 1]");
  require(c.volumetric.dims >= 1, "volumetric.dims must be positive");
}

std::vector<std::string> preset_names() { return {"easy", "medium", "hard", "noiseless"}; }

Config preset(std::string_view name) {
  Config c;
  c.name = std::string(name);
  // 312 / 291 / 329 triggers at 10 Hz, like the three 4DM scenarios
  if (name == "easy") {
    c.duration_s = 31.1;
    c.noise = {2.0, 0.0, -1, 0.12, 0.002, 0.2};
  } else if (name == "medium") {
    c.duration_s = 29.0;
    c.rig.motion = sim::MotionClass::Moving;
    c.rig.sway_deg = 12.0;
    c.noise = {2.0, 0.0, -1, 0.2, 0.003, 0.2};
  } else if (name == "hard") {
    c.duration_s = 32.8;
    c.rig.motion = sim::MotionClass::Moving;
    c.rig.sway_deg = 20.0;
    c.rig.shake_deg = 1.5;
    c.rig.shake_m = 0.02;
    c.noise = {2.0, 0.0, -1, 0.3, 0.004, 0.2};
    c.network.jitter_ms = 4.0;
  } else if (name == "noiseless") {
    c.duration_s = 9.9;  // 100 triggers
    c.noise = {0.0, 0.0, -1, 0.0, 0.0, 0.2};
    c.clock.drift_ppm = 0.0;
  } else {
    fail(ErrorCode::ConfigError, "unknown preset " + std::string(name));
  }
  return c;
}

Config config_from_json(const json& j) {
  Config c;
  if (j.contains("base")) c = preset(j.at("base").get<std::string>());
  apply(j, c);
  validate(c);
  return c;
}

Config load_config(const std::string& name_or_path) {
  for (const auto& p : preset_names())
    if (p == name_or_path) {
      Config c = preset(p);
      validate(c);
      return c;
    }
  std::ifstream in(name_or_path);
  if (!in) fail(ErrorCode::ConfigError, "no preset or readable file named " + name_or_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, name_or_path + ": " + e.what());
  }
  Config c = config_from_json(j);
  if (!j.contains("name")) c.name = std::filesystem::path(name_or_path).stem().string();
  return c;
}

json to_json(const Config& c) {
  json j;
  j["name"] = c.name;
  j["devices"] = c.devices;
  j["trigger_hz"] = c.trigger_hz;
  j["duration_s"] = c.duration_s;
  j["scheme"] = c.scheme;
  j["rtt_samples"] = c.rtt_samples;
  j["ntp_requests"] = c.ntp_requests;
  j["actor_hz"] = c.actor_hz;
  j["rig"] = {{"radius", c.rig.radius},       {"height", c.rig.height},     {"motion", motion_name(c.rig.motion)},
              {"sway_deg", c.rig.sway_deg},   {"sway_hz", c.rig.sway_hz},   {"shake_deg", c.rig.shake_deg},
              {"shake_m", c.rig.shake_m},     {"shake_hz", c.rig.shake_hz}};
  j["noise"] = {{"pixel_sigma", c.noise.pixel_sigma},
                {"miss_rate", c.noise.miss_rate},
                {"affected_cameras", c.noise.affected_cameras},
                {"rotation_sigma_deg", c.noise.rotation_sigma_deg},
                {"translation_sigma_m", c.noise.translation_sigma_m},
                {"reversion", c.noise.reversion}};
  j["clock"] = {{"offset_ms", c.clock.offset_ms}, {"drift_ppm", c.clock.drift_ppm}};
  j["network"] = {{"base_ms", c.network.base_ms},
                  {"jitter_ms", c.network.jitter_ms},
                  {"jitter_shape", c.network.jitter_shape},
                  {"trigger_loss", c.network.trigger_loss},
                  {"asymmetry_ms", c.network.asymmetry_ms},
                  {"relay_processing_ms", c.network.relay_processing_ms},
                  {"data_latency_ms", c.network.data_latency_ms},
                  {"bandwidth_bytes_per_s", c.network.bandwidth_bytes_per_s}};
  j["data"] = {{"payload", c.data.payload},
               {"image_bytes", c.data.image_bytes},
               {"merge_timeout_ms", c.data.merge_timeout_ms}};
  j["reconstruction"] = {{"mode", c.reconstruction.mode},
                         {"pair_min_deg", c.reconstruction.pair_min_deg},
                         {"pair_max_deg", c.reconstruction.pair_max_deg},
                         {"min_confidence", c.reconstruction.min_confidence}};
  j["sync"] = {{"schemes", c.sync.schemes},       {"jitter_ms", c.sync.jitter_ms},
               {"devices", c.sync.devices},       {"asserted_devices", c.sync.asserted_devices},
               {"asymmetry_ms", c.sync.asymmetry_ms}, {"seeds", c.sync.seeds},
               {"duration_s", c.sync.duration_s}};
  j["freq"] = {{"frequencies_hz", c.freq.frequencies_hz}, {"devices", c.freq.devices},
               {"cap_bytes_per_s", c.freq.cap_bytes_per_s}, {"record_bytes", c.freq.record_bytes},
               {"duration_s", c.freq.duration_s},         {"window_s", c.freq.window_s},
               {"latency_ms", c.freq.latency_ms},         {"jitter_ms", c.freq.jitter_ms}};
  j["missdet"] = {{"rates", c.missdet.rates},
                  {"affected", c.missdet.affected},
                  {"pixel_sigmas", c.missdet.pixel_sigmas},
                  {"seeds", c.missdet.seeds},
                  {"frames", c.missdet.frames}};
  j["volumetric"] = {{"thresholds", c.volumetric.thresholds},
                     {"dims", c.volumetric.dims},
                     {"frames", c.volumetric.frames},
                     {"pose_noise_deg", c.volumetric.pose_noise_deg},
                     {"mesh_threshold", c.volumetric.mesh_threshold}};
  return j;
}

std::string config_hash(const Config& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(to_json(config).dump()));
  return buf;
}

void claim_output_dir(const std::filesystem::path& dir, const Config& config, std::string_view experiment) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / "config.json";
  const std::string hash = config_hash(config);
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    json old;
    try {
      old = json::parse(in);
    } catch (const json::exception&) {
      fail(ErrorCode::ConfigMismatch, path.string() + " is not a config we wrote");
    }
    if (old.value("config_hash", "") != hash || old.value("experiment", "") != experiment)
      fail(ErrorCode::ConfigMismatch, dir.string() + " holds output of a different config or experiment");
  }
  json j;
  j["config_hash"] = hash;
  j["experiment"] = experiment;
  j["config"] = to_json(config);
  std::ofstream out(path, std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace syncap::harness
