#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mixc {

// Seeded random stream. All randomness in the library flows through this
// wrapper so that runs are reproducible and sub-streams can be derived per
// sample / per batch, making parallel and serial execution byte-identical.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Derive an independent stream from (seed, path...). Hash-chained with
    // splitmix64 so nearby inputs give uncorrelated streams.
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    // Uniform on [0,1), 53-bit resolution.
    double uniform();
    // Uniform on (0,1]; safe to pass to log().
    double uniform_pos();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    bool coin() { return uniform() < 0.5; }

    // Standard normal via Box-Muller (two fresh uniforms per call, no cache).
    double normal();

    // Gamma(shape, 1) via Marsaglia-Tsang; shapes below 1 use the
    // Gamma(shape+1) * U^(1/shape) boost.
    double gamma(double shape);

    // Beta(a, b) as X / (X + Y) with X~Gamma(a), Y~Gamma(b).
    double beta(double a, double b);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::uint32_t> permutation(std::uint32_t n);

   private:
    std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mixc
