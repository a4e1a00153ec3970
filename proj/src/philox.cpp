#include "ndo/philox.hpp"

#include <cmath>

namespace ndo {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr double kTwoPi = 6.28318530717958647692;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}
}  // namespace

std::array<std::uint32_t, 4> Philox::block(const std::array<std::uint32_t, 2>& key,
                                           const std::array<std::uint32_t, 4>& counter) {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint32_t Philox::next_u32() {
    if (buffer_pos_ == 4) {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_index_),
            static_cast<std::uint32_t>(block_index_ >> 32), 0u, 0u};
        buffer_ = block(key_, ctr);
        ++block_index_;
        buffer_pos_ = 0;
    }
    return buffer_[buffer_pos_++];
}

double Philox::next_uniform() {
    return (static_cast<double>(next_u32()) + 1.0) * 0x1.0p-32;
}

double Philox::next_normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = kTwoPi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::complex<double> Philox::next_wiener(double dt) {
    const double scale = std::sqrt(0.5 * dt);
    const double z0 = next_normal();
    const double z1 = next_normal();
    return {scale * z0, scale * z1};
}

}  // namespace ndo
