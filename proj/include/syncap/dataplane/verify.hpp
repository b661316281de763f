#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>

#include "syncap/dataplane/record.hpp"

namespace syncap::dataplane {

enum class RejectReason : std::size_t { Checksum, BadPose, NonMonotonicTime, BadPayload, Count_ };

const char* to_string(RejectReason reason);

struct Verdict {
  bool verified = true;
  RejectReason reason = RejectReason::Checksum;  // meaningful when !verified

  static Verdict ok() { return {}; }
  static Verdict rejected(RejectReason r) { return {false, r}; }
};

inline constexpr double kPoseTolerance = 1e-6;

/// Stateful because capture times must increase per device. Rejection is a
/// value, never an exception; counts are kept per reason.
class Verifier {
 public:
  explicit Verifier(std::size_t joint_count = 25) : joint_count_(joint_count) {}

  Verdict verify(const CaptureRecord& record);

  std::uint64_t verified() const { return verified_; }
  std::uint64_t rejected(RejectReason r) const { return rejected_[static_cast<std::size_t>(r)]; }
  std::uint64_t rejected_total() const;

 private:
  std::size_t joint_count_;
  std::map<std::uint16_t, std::int64_t> last_time_;
  std::uint64_t verified_ = 0;
  std::array<std::uint64_t, static_cast<std::size_t>(RejectReason::Count_)> rejected_{};
};

}  // namespace syncap::dataplane
