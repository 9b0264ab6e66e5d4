#pragma once

#include <cstdint>
#include <random>

namespace qpf {

// Seedable, splittable generator. split(k) derives an independent stream via
// splitmix64 so that (seed, stream index) -> reproducible substream; records
// store the seed so any filter can be re-run without re-simulation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    Rng split(std::uint64_t stream) const {
        return Rng(splitmix64(seed_ ^ (0x9e3779b97f4a7c15ULL + stream)));
    }

    std::uint64_t seed() const { return seed_; }

    // N(0, stddev^2)
    double gaussian(double stddev) {
        return std::normal_distribution<double>(0.0, stddev)(engine_);
    }

    // U[0,1)
    double uniform() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    // Exp(rate), mean 1/rate
    double exponential(double rate) {
        return std::exponential_distribution<double>(rate)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace qpf
