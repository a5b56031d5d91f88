#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace niwalk {

/// Identifies one reproducible random stream. Distinct (master_seed,
/// stream_id) pairs give statistically independent streams; the stream is a
/// pure function of the pair, so any interleaving of consumers replays
/// identically.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Counter-based generator: Philox4x64-10 keyed by (master_seed, stream_id)
/// with a 128-bit block counter starting at zero. The core permutation was
/// cross-checked word-for-word against the Random123/NumPy implementation.
/// Value type; copying forks the stream at its current position.
class RandomStream {
public:
    explicit RandomStream(SeedSpec seed)
        : key0_(seed.master_seed), key1_(seed.stream_id) {}

    std::uint64_t next_u64() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in {0,...,5} by rejection on 3-bit words: values 6 and
    /// 7 are discarded, so each outcome has probability exactly 1/6.
    int step6() {
        for (;;) {
            if (nbits_ < 3) {
                bits_ = next_u64();
                nbits_ = 63;  // use 21 triplets per word, drop the top bit
            }
            int v = static_cast<int>(bits_ & 7u);
            bits_ >>= 3;
            nbits_ -= 3;
            if (v < 6) return v;
        }
    }

    /// Standard normal via the Marsaglia polar method; the spare variate is
    /// cached on the stream, keeping replay deterministic.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Three independent N(0, sigma^2) components.
    Eigen::Vector3d gaussian3(double sigma) {
        if (!(sigma > 0.0))
            throw std::invalid_argument("gaussian3: sigma must be positive");
        return {sigma * gaussian(), sigma * gaussian(), sigma * gaussian()};
    }

private:
    void refill() {
        philox_block(ctr_lo_, ctr_hi_, key0_, key1_, buf_);
        if (++ctr_lo_ == 0) ++ctr_hi_;
        buf_pos_ = 0;
    }

    static void philox_block(std::uint64_t c0, std::uint64_t c1,
                             std::uint64_t k0, std::uint64_t k1,
                             std::uint64_t out[4]) {
        constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
        constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
        constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
        constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
        std::uint64_t x0 = c0, x1 = c1, x2 = 0, x3 = 0;
        for (int r = 0; r < 10; ++r) {
            auto p0 = static_cast<unsigned __int128>(M0) * x0;
            auto p1 = static_cast<unsigned __int128>(M1) * x2;
            std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
            std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
            std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
            std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
            x0 = hi1 ^ x1 ^ k0;
            x1 = lo1;
            x2 = hi0 ^ x3 ^ k1;
            x3 = lo0;
            k0 += W0;
            k1 += W1;
        }
        out[0] = x0;
        out[1] = x1;
        out[2] = x2;
        out[3] = x3;
    }

    std::uint64_t key0_, key1_;
    std::uint64_t ctr_lo_ = 0, ctr_hi_ = 0;
    std::uint64_t buf_[4] = {};
    int buf_pos_ = 4;
    std::uint64_t bits_ = 0;
    int nbits_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline RandomStream derive_stream(SeedSpec seed) { return RandomStream(seed); }

/// Stream-id layout. The top byte tags the consumer so ids never collide
/// across experiment phases run under one master seed.
namespace stream_id {

constexpr std::uint64_t tag(std::uint64_t t) { return t << 56; }

/// One walker of one pair/tuple in the survival experiment (walker < 8).
constexpr std::uint64_t survival_walker(std::uint64_t pair_index, unsigned walker) {
    return tag(1) | (pair_index << 3) | walker;
}

/// Independent validation trials (gambler's ruin, sphere hitting, cones).
constexpr std::uint64_t validation(std::uint64_t trial) { return tag(2) | trial; }

/// Shell extension of one curve of one particle slot (rep < 2^15, shell < 256,
/// slot < 2^31). The high bit of the rep field distinguishes the two
/// ensembles of a mixing run.
constexpr std::uint64_t extension(std::uint64_t rep, std::uint64_t shell,
                                  std::uint64_t slot, unsigned curve) {
    return tag(3) | (rep << 40) | (shell << 32) | (slot << 1) | curve;
}

/// Multinomial resampling draws for one (replicate, shell).
constexpr std::uint64_t resample(std::uint64_t rep, std::uint64_t shell) {
    return tag(4) | (rep << 40) | (shell << 32);
}

/// Direct Monte Carlo trials on curve pairs (one id per trial and curve).
constexpr std::uint64_t pathspace_trial(std::uint64_t trial, unsigned curve) {
    return tag(5) | (trial << 1) | curve;
}

/// Cone splitting estimator (position-only particles).
constexpr std::uint64_t cone(std::uint64_t rep, std::uint64_t shell, std::uint64_t slot) {
    return tag(6) | (rep << 40) | (shell << 32) | slot;
}

constexpr std::uint64_t mixing_rep(std::uint64_t rep, unsigned ensemble) {
    return rep | (static_cast<std::uint64_t>(ensemble) << 14);
}

}  // namespace stream_id

}  // namespace niwalk
