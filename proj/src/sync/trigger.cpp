#include "syncap/sync/trigger.hpp"

#include <cmath>

#include "syncap/common/error.hpp"

namespace syncap::sync {

UniformTriggerPolicy::UniformTriggerPolicy(double frequency_hz, double duration_s) : frequency_hz_(frequency_hz) {
  if (!std::isfinite(frequency_hz) || frequency_hz <= 0.0) fail(ErrorCode::InvalidFrequency, "frequency must be > 0");
  if (!std::isfinite(duration_s) || duration_s < 0.0) fail(ErrorCode::InvalidArgument, "duration must be >= 0");
  // small slack so that e.g. 32.8 s * 10 Hz counts the trigger at 32.8 s
  count_ = static_cast<std::uint32_t>(std::floor(duration_s * frequency_hz + 1e-9)) + 1;
}

std::optional<Nanos> UniformTriggerPolicy::next() {
  if (k_ >= count_) return std::nullopt;
  const Nanos t = static_cast<Nanos>(std::llround(static_cast<double>(k_) * 1e9 / frequency_hz_));
  ++k_;
  return t;
}

std::vector<TriggerMsg> schedule_triggers(TriggerPolicy& policy, std::uint64_t session_id) {
  std::vector<TriggerMsg> out;
  std::uint32_t id = 0;
  while (auto t = policy.next()) out.push_back({session_id, id++, *t});
  return out;
}

std::vector<TriggerMsg> schedule_triggers(double frequency_hz, double duration_s, std::uint64_t session_id) {
  UniformTriggerPolicy policy(frequency_hz, duration_s);
  return schedule_triggers(policy, session_id);
}

bool TriggerFilter::accept(std::uint32_t trigger_id) {
  if (last_ && trigger_id <= *last_) {
    ++dropped_;
    return false;
  }
  last_ = trigger_id;
  return true;
}

}  // namespace syncap::sync
