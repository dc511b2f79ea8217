#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace repgame::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the stream of one path: a keyed hash of (root seed, path index),
/// so any path can be generated independently of the others and results do
/// not depend on scheduling.
inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t path_index) {
    return splitmix64(splitmix64(root) ^
                      (path_index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
}

/// Per-path random stream: mt19937_64 with hand-rolled Box-Muller normals,
/// fully specified by the standard, so identical across platforms and
/// thread layouts.
class PathRng {
public:
    explicit PathRng(std::uint64_t seed) : eng_(seed) {}

    /// uniform on (0, 1)
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 6.283185307179586477 * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    bool bernoulli(double prob) { return uniform() < prob; }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace repgame::detail
