#pragma once

// Counter-based RNG for reproducible parallel Monte Carlo.
//
// Every random draw is a pure function of (master seed, step, walker, draw
// index, stream class), so the schedule of threads can never change a
// simulation's output. The generator is Philox-4x32-10; known-answer vectors
// from the reference implementation are pinned in the tests.

#include <cmath>
#include <cstdint>

namespace fkdmc {

// Disjoint stream classes so draws made for different purposes never collide.
enum class StreamClass : std::uint32_t {
    init = 0,       // initial-ensemble sampling
    selection = 1,  // survival + replacement draws
    mutation = 2,   // kernel moves
    experiment = 3, // free use by experiment drivers
};

namespace detail {

struct Philox4x32State {
    std::uint32_t c[4];
};

inline void philox_mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                           std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32State philox4x32_10(Philox4x32State ctr, std::uint32_t k0,
                                     std::uint32_t k1) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0;; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        philox_mulhilo(m0, ctr.c[0], hi0, lo0);
        philox_mulhilo(m1, ctr.c[2], hi1, lo1);
        ctr = {{hi1 ^ ctr.c[1] ^ k0, lo1, hi0 ^ ctr.c[3] ^ k1, lo0}};
        if (round == 9) break;
        k0 += w0;
        k1 += w1;
    }
    return ctr;
}

}  // namespace detail

// SplitMix64; used to derive per-replication master seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t replication_seed(std::uint64_t master, std::uint64_t rep) {
    return splitmix64(master ^ splitmix64(rep + 1));
}

// One 128-bit Philox block: the atom all draws are built from.
struct RandomBlock {
    std::uint32_t w[4];
};

inline RandomBlock random_block(std::uint64_t seed, std::uint32_t step,
                                std::uint32_t walker, std::uint32_t draw,
                                StreamClass sc) {
    detail::Philox4x32State ctr{{draw, walker, step, static_cast<std::uint32_t>(sc)}};
    const auto out = detail::philox4x32_10(ctr, static_cast<std::uint32_t>(seed),
                                           static_cast<std::uint32_t>(seed >> 32));
    return {{out.c[0], out.c[1], out.c[2], out.c[3]}};
}

// Uniforms on [0,1) with 53 random bits.
inline double to_uniform(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform on (0,1]; safe as a log argument.
inline double to_uniform_pos(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// A substream addresses draws for one (step, walker, class) triple. Draw
// indices advance locally; nothing global mutates.
class Substream {
  public:
    Substream(std::uint64_t seed, std::uint32_t step, std::uint32_t walker, StreamClass sc)
        : seed_(seed), step_(step), walker_(walker), sc_(sc) {}

    // Two independent U[0,1) from one block.
    void uniform_pair(double& u0, double& u1) {
        const RandomBlock b = random_block(seed_, step_, walker_, draw_++, sc_);
        u0 = to_uniform(b.w[0], b.w[1]);
        u1 = to_uniform(b.w[2], b.w[3]);
    }

    double uniform() {
        if (have_spare_uniform_) {
            have_spare_uniform_ = false;
            return spare_uniform_;
        }
        double u0;
        uniform_pair(u0, spare_uniform_);
        have_spare_uniform_ = true;
        return u0;
    }

    // Box-Muller pair; fixed two-uniform consumption keeps the stream layout
    // independent of how many normals a caller takes.
    void normal_pair(double& z0, double& z1) {
        const RandomBlock b = random_block(seed_, step_, walker_, draw_++, sc_);
        const double u1 = to_uniform_pos(b.w[0], b.w[1]);
        const double u2 = to_uniform(b.w[2], b.w[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        z0 = r * std::cos(theta);
        z1 = r * std::sin(theta);
    }

    double normal() {
        if (have_spare_normal_) {
            have_spare_normal_ = false;
            return spare_normal_;
        }
        double z0;
        normal_pair(z0, spare_normal_);
        have_spare_normal_ = true;
        return z0;
    }

  private:
    std::uint64_t seed_;
    std::uint32_t step_;
    std::uint32_t walker_;
    StreamClass sc_;
    std::uint32_t draw_ = 0;
    double spare_uniform_ = 0.0;
    double spare_normal_ = 0.0;
    bool have_spare_uniform_ = false;
    bool have_spare_normal_ = false;
};

}  // namespace fkdmc
