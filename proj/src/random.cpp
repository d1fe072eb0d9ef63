#include "gwi/random.hpp"

#include <array>

namespace gwi {

Engine make_engine(std::uint64_t seed) {
    SplitMix64 expander(seed);
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
        const std::uint64_t w = expander.next();
        words[i] = static_cast<std::uint32_t>(w);
        words[i + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

}  // namespace gwi
