// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <cstdint>

namespace grf {

// Philox4x32-10 counter-based generator. A block cipher on a 128-bit
// counter with a 64-bit key: block(i) is a pure function of (key, i), so
// independent streams are made by partitioning the counter space instead
// of by jumping shared state. Verified against the published known-answer
// vectors in the unit tests.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint32_t key0, std::uint32_t key1) : key0_(key0), key1_(key1) {}

    // Encrypts one 128-bit counter block (10 rounds).
    Block operator()(const Block& counter) const;

private:
    std::uint32_t key0_, key1_;
};

// Inverse CDF of the standard normal distribution (Wichura's algorithm
// AS 241, double-precision branch). Max absolute error about 1e-15 over
// p in (0,1); p outside (0,1) is rejected.
double normal_quantile(double p);

// Stream of N(0,1) variates: uniforms from Philox blocks keyed by
// (seed, stream), normals by inverse CDF. The counter layout is
//   counter = { block_lo, block_hi, stream_lo, stream_hi }
// so distinct stream ids never collide for any block count, and the
// entire stream is a pure function of (seed, stream). One 128-bit block
// yields two doubles.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);

    // Next standard normal variate.
    double next();

    // Fills out[0..n) with consecutive variates.
    void fill(double* out, long n);

private:
    double uniform_();  // strictly inside (0,1), 53-bit resolution

    Philox4x32 cipher_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    Philox4x32::Block buffer_{};
    int buffered_ = 0;  // unread 64-bit lanes left in buffer_ (0..2)
};

}  // namespace grf
