#pragma once

// Counter-based random number generation (Philox 4x32, 10 rounds). The
// generator state is a 128-bit counter split into (block index, stream id)
// plus a 64-bit key derived from the seed, so replicate r of an ensemble
// simply uses stream r of the same seed: streams never overlap and the
// draw sequence is reproducible bit-for-bit across platforms and runs.
// Floating-point draws are built only from integer output (53-bit mantissa
// for u01, inversion for exponentials), which keeps file-level output
// byte-identical for a fixed seed.

#include <cstdint>

#include "pdmp/common.hpp"

namespace pdmp {

class Philox {
public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          block_(0),
          stream_(stream),
          idx_(4) {}

    std::uint32_t next_u32() {
        if (idx_ >= 4) {
            generate_block();
            idx_ = 0;
        }
        return out_[idx_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0,1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exponential via inversion; u in [0,1) makes log1p(-u) finite.
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    // Index i with probability w[i]/total; total must equal the sum of w.
    int categorical(const double* w, int m, double total) {
        double u = u01() * total;
        double acc = 0;
        for (int i = 0; i < m - 1; ++i) {
            acc += w[i];
            if (u < acc) return i;
        }
        return m - 1;
    }

    std::uint64_t stream() const { return stream_; }

private:
    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void generate_block() {
        // counter words: (block lo, block hi, stream lo, stream hi)
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, c0, hi0, lo0);
            mulhilo(0xCD9E8D57u, c2, hi1, lo1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_[0] = c0;
        out_[1] = c1;
        out_[2] = c2;
        out_[3] = c3;
        ++block_;
    }

    std::uint32_t key0_, key1_;
    std::uint64_t block_, stream_;
    std::uint32_t out_[4];
    int idx_;
};

}  // namespace pdmp
