#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "ecmc/common.hpp"

namespace ecmc {

// Deterministic random stream. All derived draws (uniform, Bernoulli,
// bounded integer, Gaussian, shuffle) are built here from raw mt19937_64
// output instead of std:: distributions, so sequences are bit-identical
// across standard library implementations.
class RandomStream {
public:
    // Seeds from a key of 64-bit words via std::seed_seq. Streams with
    // different keys are treated as independent.
    explicit RandomStream(const std::vector<std::uint64_t>& key) {
        std::vector<std::uint32_t> words;
        words.reserve(key.size() * 2);
        for (std::uint64_t k : key) {
            words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
            words.push_back(static_cast<std::uint32_t>(k >> 32));
        }
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
    }

    RandomStream(std::initializer_list<std::uint64_t> key)
        : RandomStream(std::vector<std::uint64_t>(key)) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0) {
            throw ContractViolation("bernoulli probability outside [0, 1]");
        }
        return uniform01() < p;
    }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) {
            throw ContractViolation("below(0) is undefined");
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw = engine_();
        while (draw >= limit) {
            draw = engine_();
        }
        return draw % n;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform01();  // in (0, 1], keeps log finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    // Fisher-Yates shuffle driven by below().
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace ecmc
