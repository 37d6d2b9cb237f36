#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace rcsim {

// All randomness in the library flows through Rng instances derived from a
// single root seed and a stream name, so that independent components
// (generation, shuffling, sampling, ...) can be replayed in isolation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

    // Derive a child seed / stream from a root seed and a stream name.
    static std::uint64_t derive(std::uint64_t root_seed, std::string_view name) {
        return mix(root_seed, fnv1a(name));
    }
    static Rng stream(std::uint64_t root_seed, std::string_view name) {
        return Rng(derive(root_seed, name));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    long long uniform_int(long long lo, long long hi) {  // inclusive range
        return lo + static_cast<long long>(uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Standard normal via Box-Muller; stateless across calls so replay does
    // not depend on caller interleaving.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_index(i)]);
        }
    }

    // k distinct indices from [0, n), in ascending order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        k = std::min(k, n);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(idx[i], idx[i + uniform_index(n - i)]);
        }
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    // splitmix64 finalizer over the xor of root and stream hash
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace rcsim
