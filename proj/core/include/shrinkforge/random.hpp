#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace shrinkforge {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based seed derivation: every stream is a pure function of the
/// master seed and its path, so adding a stream never shifts another.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Stable 64-bit tag for a name (FNV-1a).
std::uint64_t name_tag(std::string_view name) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace shrinkforge
