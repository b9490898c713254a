#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (key, counter), so a stream identified by
// (seed, x index, trial, tag) yields the same numbers no matter which worker
// thread evaluates it or in what order.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

namespace poisonfb {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter block(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& c, const Key& k) noexcept
    {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// SplitMix64 finalizer; used to fold tags into stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic random stream addressed by a seed and three 32-bit
/// coordinates. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    constexpr RandomStream() noexcept : RandomStream(0) {}

    constexpr explicit RandomStream(std::uint64_t seed, std::uint32_t a = 0,
                                    std::uint32_t b = 0, std::uint32_t c = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          coords_{a, b, c}
    {
    }

    /// Independent child stream; the parent is not advanced.
    [[nodiscard]] constexpr RandomStream child(std::uint64_t tag) const noexcept
    {
        const std::uint64_t key = (std::uint64_t{key_[1]} << 32) | key_[0];
        RandomStream out = *this;
        const std::uint64_t k = mix64(key ^ mix64(tag + 0x632BE59BD9B4E019ull));
        out.key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        out.block_ = 0;
        out.lane_ = 4;
        return out;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    constexpr double uniform() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal pair from one Box-Muller transform.
    std::pair<double, double> normal_pair() noexcept
    {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double normal() noexcept { return normal_pair().first; }

    /// Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
    std::complex<double> complex_normal() noexcept
    {
        const auto [re, im] = normal_pair();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

private:
    constexpr std::uint32_t next_u32() noexcept
    {
        if (lane_ == 4) {
            buffer_ = Philox4x32::block({block_, coords_[0], coords_[1], coords_[2]}, key_);
            ++block_;
            lane_ = 0;
        }
        return buffer_[lane_++];
    }

    Philox4x32::Key key_{};
    std::array<std::uint32_t, 3> coords_{};
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int lane_ = 4;
};

} // namespace poisonfb
