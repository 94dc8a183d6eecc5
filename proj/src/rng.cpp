#include "deepcond/rng.hpp"

#include <cmath>

namespace deepcond {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline double to_unit(std::uint64_t bits) {
    return ((bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::raw(std::uint64_t hi,
                                             std::uint64_t lo) const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(lo >> 32),
        static_cast<std::uint32_t>(hi), static_cast<std::uint32_t>(hi >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
        const std::array<std::uint32_t, 4> next = {
            static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
            static_cast<std::uint32_t>(p0)};
        ctr = next;
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

double CounterRng::uniform(std::uint64_t stream, std::uint32_t layer,
                           std::uint64_t index) const {
    auto r = raw(pack_hi(stream, layer), index);
    return to_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t stream,
                                                  std::uint32_t layer,
                                                  std::uint64_t index) const {
    auto r = raw(pack_hi(stream, layer), index);
    const double u1 = to_unit((static_cast<std::uint64_t>(r[0]) << 32) | r[1]);
    const double u2 = to_unit((static_cast<std::uint64_t>(r[2]) << 32) | r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double CounterRng::normal(std::uint64_t stream, std::uint32_t layer,
                          std::uint64_t index) const {
    return normal_pair(stream, layer, index).first;
}

}  // namespace deepcond
