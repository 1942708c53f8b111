#ifndef ACFS_RNG_HPP
#define ACFS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace acfs {

// splitmix64 finalizer; used both as a bit mixer and for seed derivation.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a child seed from a base seed and a list of label words.
// Label-keyed (not order-of-execution keyed), so adding a new consumer
// never perturbs the streams of existing ones.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = splitmix64(base ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w));
    return h;
}

inline std::uint64_t hash_label(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

double norm_quantile(double p); // special.hpp

// Deterministic uniform/normal stream. Normals go through the inverse
// normal CDF so draws depend only on the mt19937_64 bit stream, not on
// any library distribution implementation.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    // uniform in (0,1), never exactly 0 or 1
    double uniform() {
        const std::uint64_t k = gen_() >> 11; // 53 bits
        return (static_cast<double>(k) + 0.5) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return norm_quantile(uniform()); }

    // integer in [0, n)
    std::uint64_t integer(std::uint64_t n) {
        // multiply-shift; bias is negligible for n << 2^64
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace acfs

#endif
