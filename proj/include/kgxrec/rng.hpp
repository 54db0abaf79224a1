#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kgxrec::nn {

// Deterministic RNG. mt19937_64 output is pinned by the standard and the
// uniform/normal mappings are implemented here, so the same seed produces the
// same stream on every platform (std::*_distribution would not guarantee that).
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Box-Muller; one spare value cached.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + stddev * (r * std::cos(theta));
    }

    // Uniform index in [0, n). Rejection-free modulo is fine here: n is tiny
    // relative to 2^64, bias is unobservable.
    size_t index(size_t n) { return n == 0 ? 0 : static_cast<size_t>(gen_() % n); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace kgxrec::nn
