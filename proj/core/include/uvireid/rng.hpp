#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "uvireid/errors.hpp"

namespace uvireid {

// Deterministic random source. mt19937_64 output is pinned by the standard;
// the distributions here are hand-rolled so that streams are reproducible
// across standard libraries (std::normal_distribution is not).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Independent stream derived from (seed, stream, index) via splitmix64.
    static Rng derive(uint64_t seed, uint64_t stream, uint64_t index = 0) {
        uint64_t x = seed;
        x = mix(x + 0x9e3779b97f4a7c15ull + stream);
        x = mix(x + 0x9e3779b97f4a7c15ull + index);
        return Rng(x);
    }

    uint64_t next() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n), rejection sampled (no modulo bias).
    int uniform_int(int n) {
        if (n <= 0) throw ContractError("Rng::uniform_int: n must be positive");
        uint64_t bound = static_cast<uint64_t>(n);
        uint64_t q = UINT64_MAX / bound;
        uint64_t valid = q * bound;
        for (;;) {
            uint64_t x = next();
            if (x < valid) return static_cast<int>(x % bound);
        }
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace uvireid
