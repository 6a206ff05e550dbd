#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace refract {

/// Philox4x32-10 counter-based generator. A stream is keyed by a 64-bit seed;
/// the 128-bit counter is split into a 64-bit substream id (one per simulated
/// path) and a 64-bit block index, so path outputs are independent of worker
/// scheduling.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) {
        key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
        ctr_ = {static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                0u, 0u};
        refill();
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()() {
        if (idx_ == 4) {
            bump_counter();
            refill();
        }
        return block_[idx_++];
    }

    /// One block for a given counter/key; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static std::array<std::uint32_t, 4> single_round(const std::array<std::uint32_t, 4>& x,
                                                     const std::array<std::uint32_t, 2>& k) {
        const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * x[0];
        const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * x[2];
        return {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
                static_cast<std::uint32_t>(p1),
                static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
                static_cast<std::uint32_t>(p0)};
    }

    void bump_counter() {
        if (++ctr_[2] == 0) ++ctr_[3];  // block index lives in the upper half
    }
    void refill() {
        block_ = block(ctr_, key_);
        idx_ = 0;
    }

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 0;
};

/// Per-path random stream with the handful of variates the simulator needs.
/// Distributions are implemented on top of the raw bits so estimates are
/// reproducible across standard libraries.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path) : gen_(seed, path) {}

    double uniform() {  // in [0, 1)
        const std::uint64_t hi = gen_();
        const std::uint64_t lo = gen_();
        return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log1p(-uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    Philox4x32 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace refract
