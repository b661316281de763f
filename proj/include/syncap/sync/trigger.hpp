#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "syncap/sync/time.hpp"

namespace syncap::sync {

struct TriggerMsg {
  std::uint64_t session_id = 0;
  std::uint32_t trigger_id = 0;
  Nanos host_send_time = 0;  // on the host clock, relative to session start

  bool operator==(const TriggerMsg&) const = default;
};

// When the host emits triggers. Replaceable so other emission patterns can
// be plugged into a session.
class TriggerPolicy {
 public:
  virtual ~TriggerPolicy() = default;
  // Next emission time, or nullopt once the schedule is exhausted.
  virtual std::optional<Nanos> next() = 0;
};

/// Emissions at k/phi for k = 0 .. floor(duration * phi).
class UniformTriggerPolicy final : public TriggerPolicy {
 public:
  UniformTriggerPolicy(double frequency_hz, double duration_s);

  std::optional<Nanos> next() override;
  std::uint32_t count() const { return count_; }

 private:
  double frequency_hz_;
  std::uint32_t count_;
  std::uint32_t k_ = 0;
};

/// Throws InvalidFrequency for phi <= 0 (or non-finite).
std::vector<TriggerMsg> schedule_triggers(double frequency_hz, double duration_s, std::uint64_t session_id = 0);

/// Drains a policy into numbered triggers.
std::vector<TriggerMsg> schedule_triggers(TriggerPolicy& policy, std::uint64_t session_id = 0);

/// Client-side acceptance: only ids above the last accepted one pass, so a
/// late lower id is dropped rather than reordered.
class TriggerFilter {
 public:
  bool accept(std::uint32_t trigger_id);
  std::optional<std::uint32_t> last() const { return last_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  std::optional<std::uint32_t> last_;
  std::uint64_t dropped_ = 0;
};

}  // namespace syncap::sync
