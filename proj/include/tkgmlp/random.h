#pragma once

#include <cstdint>
#include <random>

namespace tkgmlp {

using Rng = std::mt19937_64;

// Mixes two 64-bit values into a well-spread seed (splitmix64 finalizer).
// Used wherever a child stream is needed: per-column generators, per-step
// dropout masks, per-configuration grid seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(Rng& rng);

}  // namespace tkgmlp
