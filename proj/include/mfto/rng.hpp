#ifndef MFTO_RNG_HPP
#define MFTO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace mfto {

// splitmix64; used to derive independent per-stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct RngSpec {
    std::uint64_t seed = 0;
    // Fixed generator identity; recorded in artifact headers. Streams are
    // bit-exact for equal specs.
    std::string algorithm = "mt19937_64/boxmuller-v1";
};

// mt19937_64 with hand-rolled output maps so that the number of engine draws
// per variate is fixed: 1 per uniform, 2 per normal (Box-Muller, no caching).
// This keeps parallel-assembly streams reproducible and lets two assembly
// paths with the same draw pattern consume identical samples.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {  // in [0,1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        // avoid log(0)
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t raw() { return engine_(); }

    // Documented stream-splitting rule: stream s of master seed m is seeded
    // with splitmix64(m ^ splitmix64(s + 1)).
    static Rng for_stream(std::uint64_t master, std::uint64_t stream) {
        return Rng(splitmix64(master ^ splitmix64(stream + 1)));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mfto

#endif
