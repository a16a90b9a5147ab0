#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace semipartm {

using Rng = std::mt19937_64;

// Mixes a base seed with a sequence of stream tags (replicate index, component
// tag, fold, ...) into an independent 64-bit seed. splitmix64 finalizer over
// each word in turn.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> tags);

// Stable 64-bit tag for a component name (FNV-1a).
std::uint64_t name_tag(std::string_view name);

// Uniform draw on (0, 1].
inline double uniform_open_closed(Rng& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace semipartm
