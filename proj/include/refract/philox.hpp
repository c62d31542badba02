#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace refract {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += w0;
            key[1] += w1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Philox4x32-10 on n consecutive counters (low word incremented), written as
/// 4n words.
template <int N>
inline void philox4x32_blocks(std::uint64_t first, std::uint32_t c2, std::uint32_t c3, std::array<std::uint32_t, 2> key,
                              std::uint32_t* out) {
    for (int i = 0; i < N; ++i) {
        const std::uint64_t c = first + static_cast<std::uint64_t>(i);
        const auto r = philox4x32({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), c2, c3}, key);
        for (int j = 0; j < 4; ++j) out[4 * i + j] = r[j];
    }
}

/// Counter-based stream for one path: key = seed, counter = (block, path).
/// Streams of different paths never overlap and need no shared state.
class PathRng {
public:
    using result_type = std::uint32_t;

    PathRng(std::uint64_t seed, std::uint64_t path)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_{static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == kWords) refill();
        return buf_[pos_++];
    }

    /// Uniform on the open interval (0, 1), 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)() >> 5, lo = (*this)() >> 6;
        return (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    static constexpr int kBlocks = 8;
    static constexpr int kWords = 4 * kBlocks;

    void refill() {
        philox4x32_blocks<kBlocks>(block_, path_[0], path_[1], key_, buf_.data());
        block_ += kBlocks;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> path_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, kWords> buf_{};
    int pos_ = kWords;
};

}  // namespace refract
