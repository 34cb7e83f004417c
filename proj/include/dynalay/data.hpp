#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dynalay/linalg.hpp"

namespace dynalay {

enum class Difficulty { Easy, Hard };

struct Dataset {
    std::vector<Vector> features;
    std::vector<std::size_t> labels;
    /// Empty, or one tag per sample.
    std::vector<Difficulty> difficulty;
    std::size_t n_classes = 2;

    std::size_t size() const noexcept { return features.size(); }
    std::size_t dim() const noexcept { return features.empty() ? 0 : features.front().size(); }
    bool has_difficulty() const noexcept { return !difficulty.empty(); }

    /// Throws InputError when lengths, dimensions, labels or values are inconsistent.
    void validate() const;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Two interleaved unit half-circles, n/2 points each, shuffled. Class 0 lies on
/// (cos θ, sin θ), class 1 on (1 − cos θ, 0.5 − sin θ), θ ∈ [0, π], plus
/// isotropic Gaussian noise of std `noise`.
Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed);

/// Unit normal and tangent of the true boundary of the hard/easy mixture.
struct HardEasyGeometry {
    double normal[2];
    double tangent[2];
};
HardEasyGeometry hard_easy_geometry() noexcept;

/// Linearly separable core plus a hard band around the boundary.
///
/// Easy samples sit at signed distance ±[margin_easy, margin_easy + 1] from the
/// boundary and are labelled by side. Hard samples come in mirrored pairs at
/// distance ±r, r < margin_hard, and are labelled by alternating stripes along the
/// boundary, `stripe_width` wide, so the side of the boundary predicts exactly
/// half of them.
Dataset gen_hard_easy_mixture(std::size_t n, double margin_easy, double margin_hard, std::uint64_t seed,
                              double hard_fraction = 0.5, double stripe_width = 0.5);

/// Header "f0,...,f{m-1},label[,difficulty]"; difficulty is "easy"/"hard".
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
/// Throws FormatError with the offending line number.
Dataset read_dataset_csv(const std::filesystem::path& path);

} // namespace dynalay
