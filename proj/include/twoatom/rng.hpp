#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace twoatom {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// One (seed, stream) pair names an independent random stream, so results do
/// not depend on which thread consumes which stream.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) {
            buf_ = bijection(ctr_, key_);
            if (++ctr_[0] == 0) ++ctr_[1];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    /// Uniform double in the open interval (0, 1), 53 random bits.
    double uniform() {
        const std::uint64_t a = (*this)() >> 5;
        const std::uint64_t b = (*this)() >> 6;
        return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    /// The raw 10-round bijection.
    static Block bijection(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    Key key_;
    Block ctr_;
    Block buf_{};
    int pos_ = 4;
};

}  // namespace twoatom
