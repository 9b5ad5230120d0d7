#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace patchproc {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

struct RngSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

/// Stream of 64-bit draws for one realization. The key is the master seed and the upper half of
/// the counter is the stream id, so any (seed, stream) pair is reproducible on any thread and
/// distinct streams never overlap.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(RngSpec spec)
        : key_{static_cast<std::uint32_t>(spec.master_seed), static_cast<std::uint32_t>(spec.master_seed >> 32)},
          stream_{static_cast<std::uint32_t>(spec.stream_id), static_cast<std::uint32_t>(spec.stream_id >> 32)}
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (pos_ == 2) refill();
        const auto lo = static_cast<std::uint64_t>(buf_[2 * pos_]);
        const auto hi = static_cast<std::uint64_t>(buf_[2 * pos_ + 1]);
        ++pos_;
        return (hi << 32) | lo;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate; uses 1-u in (0, 1] so the log is finite.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    void refill()
    {
        buf_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              stream_[0], stream_[1]},
                             key_);
        ++block_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 2;
};

}  // namespace patchproc
