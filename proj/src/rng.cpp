#include "amkt/rng.hpp"

#include <array>

namespace amkt {

Engine make_engine(std::uint64_t seed) {
    // seed_seq spreads the 64 bits over the full mt19937_64 state
    std::array<std::uint32_t, 4> words{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(mix64(seed)),
        static_cast<std::uint32_t>(mix64(seed) >> 32),
    };
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

}  // namespace amkt
