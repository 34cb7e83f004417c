#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace dynalay {

/// Seeded generator shared by data generation, initialization and sampling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

    /// FNV-1a over the serialized engine state, as 16 hex digits.
    std::string state_digest() const;

private:
    std::mt19937_64 engine_;
};

/// FNV-1a 64-bit of a byte string, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

} // namespace dynalay
