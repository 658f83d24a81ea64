#pragma once

#include <cstdint>
#include <random>

namespace amkt {

using Engine = std::mt19937_64;

/// Independent random streams carved out of one root seed. Each stream gets its
/// own engine, so changing how many values one consumer draws (e.g. running
/// more steps) never shifts the values seen by another (e.g. agent traits).
enum class Stream : std::uint64_t {
    traits = 1,
    thresholds = 2,
    news = 3,
    private_noise = 4,
    permutation = 5,
    network = 6,
};

/// SplitMix64 finaliser.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream) noexcept {
    return mix64(mix64(root) ^ mix64(static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
}

[[nodiscard]] Engine make_engine(std::uint64_t seed);

[[nodiscard]] inline Engine make_engine(std::uint64_t root, Stream stream) {
    return make_engine(derive_seed(root, stream));
}

}  // namespace amkt
