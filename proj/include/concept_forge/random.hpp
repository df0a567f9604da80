#pragma once
// Deterministic hashing and seeding helpers. Results are identical across
// runs, platforms and thread schedules.

#include <cstdint>
#include <string_view>

namespace cforge {

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a key.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                                    std::uint64_t salt = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(key)) + salt);
}

// Unbiased draw from [0, n) by rejection. n must be positive.
template <class Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
        x = static_cast<std::uint64_t>(rng());
    } while (x >= limit);
    return x % n;
}

// Fisher-Yates with uniform_index, so the permutation does not depend on the
// standard library's distribution implementation.
template <class It, class Rng>
void stable_shuffle(It first, It last, Rng& rng) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        auto j = uniform_index(rng, i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace cforge
