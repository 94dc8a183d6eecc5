#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace deepcond {

// Counter-based random streams (Philox4x32-10). A draw is addressed by
// (seed; stream, layer, index), so any entry can be regenerated in any
// order: trial t sees the same weights whether run alone, in a batch, or
// across threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                                   static_cast<std::uint32_t>(seed >> 32)} {}

    // Four words of counter-keyed bits.
    std::array<std::uint32_t, 4> raw(std::uint64_t hi, std::uint64_t lo) const;

    // Uniform draw in (0, 1), 53-bit resolution.
    double uniform(std::uint64_t stream, std::uint32_t layer,
                   std::uint64_t index) const;

    // Standard normal draw (Box-Muller on one counter block).
    double normal(std::uint64_t stream, std::uint32_t layer,
                  std::uint64_t index) const;

    // Both Box-Muller outputs of one counter block.
    std::pair<double, double> normal_pair(std::uint64_t stream,
                                          std::uint32_t layer,
                                          std::uint64_t index) const;

private:
    std::array<std::uint32_t, 2> key_;

    static std::uint64_t pack_hi(std::uint64_t stream, std::uint32_t layer) {
        return (stream << 16) ^ layer;
    }
};

}  // namespace deepcond
