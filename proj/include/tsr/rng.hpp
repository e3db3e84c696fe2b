#pragma once

#include <cstdint>

namespace tsr {

// Deterministic PRNG used everywhere randomness is needed. splitmix64 is
// tiny, fast and identical on every platform, unlike the std::*_distribution
// adapters whose output is implementation defined. Substreams are derived by
// hashing a stream id into the seed, so one master seed drives independent
// per-tree / per-restart sequences regardless of execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

    // uniform in [lo, hi]
    int range(int lo, int hi) { return lo + int(below(std::uint64_t(hi - lo + 1))); }

    // uniform in [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace tsr
