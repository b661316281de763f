#pragma once

#include <cstddef>
#include <optional>

#include "syncap/sync/rtt.hpp"
#include "syncap/sync/time.hpp"

namespace syncap::sync {

enum class SyncVariant {
  TriggerRelay,
  NtpBaseline,
  NtpAveraged,
  NoCompensation,  // relay without delay compensation; capture on arrival
};

struct SyncScheme {
  SyncVariant variant = SyncVariant::TriggerRelay;
  int ntp_request_count = 1;

  static SyncScheme trigger_relay() { return {SyncVariant::TriggerRelay, 1}; }
  static SyncScheme ntp_baseline() { return {SyncVariant::NtpBaseline, 1}; }
  static SyncScheme ntp_averaged(int count = 50) { return {SyncVariant::NtpAveraged, count}; }
  static SyncScheme no_compensation() { return {SyncVariant::NoCompensation, 1}; }

  // Throws InvalidArgument for a count below 1, or other than 1 for the baseline.
  void validate() const;
};

const char* to_string(SyncVariant variant);

struct DeviceRole {
  bool host = false;
  std::size_t client = 0;  // index into the plan when not host

  static DeviceRole as_host() { return {true, 0}; }
  static DeviceRole as_client(std::size_t index) { return {false, index}; }
};

struct CaptureContext {
  DeviceRole role;
  // Relay variants: local time the trigger arrived (for the host, its own send time).
  Nanos arrival = 0;
  const CompensationPlan* plan = nullptr;
  // NTP variants: agreed global instant and the estimated offset
  // (server minus client) in nanoseconds.
  Nanos agreed_global = 0;
  std::optional<double> offset_estimate_ns;
};

/// Local-clock capture time for one device. Throws MissingPlan when a relay
/// scheme has no plan (or the client is outside it) and MissingOffset when
/// an NTP scheme has no estimate.
Nanos capture_instant(const SyncScheme& scheme, const CaptureContext& context);

}  // namespace syncap::sync
