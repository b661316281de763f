#pragma once

#include <cmath>
#include <cstdint>

namespace syncap::sync {

// Timestamps and durations are integer nanoseconds throughout.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMs = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

inline Nanos ms_to_ns(double ms) { return static_cast<Nanos>(std::llround(ms * 1e6)); }
inline double ns_to_ms(Nanos ns) { return static_cast<double>(ns) / 1e6; }
inline Nanos seconds_to_ns(double s) { return static_cast<Nanos>(std::llround(s * 1e9)); }
inline double ns_to_seconds(Nanos ns) { return static_cast<double>(ns) / 1e9; }

}  // namespace syncap::sync
