#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace syncap {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a tag, so that
// adding a consumer of randomness never perturbs the draws of another.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, tag, index));
}

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace syncap
