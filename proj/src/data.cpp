#include "dynalay/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "dynalay/error.hpp"
#include "dynalay/rng.hpp"

namespace dynalay {

void Dataset::validate() const {
    if (features.size() != labels.size()) throw InputError("Dataset: features and labels differ in length");
    if (!difficulty.empty() && difficulty.size() != features.size())
        throw InputError("Dataset: difficulty tags differ in length");
    if (n_classes < 2) throw InputError("Dataset: need at least two classes");
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim()) throw InputError("Dataset: ragged feature row " + std::to_string(i));
        if (!all_finite(features[i])) throw InputError("Dataset: non-finite feature in row " + std::to_string(i));
        if (labels[i] >= n_classes) throw InputError("Dataset: label out of range in row " + std::to_string(i));
    }
}

namespace {

Dataset shuffled(Dataset d, Rng& rng) {
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    Dataset out;
    out.n_classes = d.n_classes;
    for (std::size_t i : order) {
        out.features.push_back(std::move(d.features[i]));
        out.labels.push_back(d.labels[i]);
        if (d.has_difficulty()) out.difficulty.push_back(d.difficulty[i]);
    }
    return out;
}

} // namespace

Dataset gen_two_moons(std::size_t n, double noise, std::uint64_t seed) {
    if (n == 0 || n % 2 != 0) throw InputError("gen_two_moons: n must be positive and even");
    if (!(noise >= 0.0)) throw InputError("gen_two_moons: noise must be >= 0");
    Rng rng(seed);
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % 2;
        const double theta = rng.uniform(0.0, std::numbers::pi);
        Vector p = label == 0 ? Vector{std::cos(theta), std::sin(theta)}
                              : Vector{1.0 - std::cos(theta), 0.5 - std::sin(theta)};
        if (noise > 0.0) {
            p[0] += rng.normal(0.0, noise);
            p[1] += rng.normal(0.0, noise);
        }
        d.features.push_back(std::move(p));
        d.labels.push_back(label);
    }
    return shuffled(std::move(d), rng);
}

HardEasyGeometry hard_easy_geometry() noexcept {
    constexpr double phi = 0.5;
    return {{std::cos(phi), std::sin(phi)}, {-std::sin(phi), std::cos(phi)}};
}

Dataset gen_hard_easy_mixture(std::size_t n, double margin_easy, double margin_hard, std::uint64_t seed,
                              double hard_fraction, double stripe_width) {
    if (!(margin_easy > margin_hard && margin_hard > 0.0))
        throw InputError("gen_hard_easy_mixture: need margin_easy > margin_hard > 0");
    if (!(hard_fraction >= 0.0 && hard_fraction <= 1.0))
        throw InputError("gen_hard_easy_mixture: hard_fraction must lie in [0, 1]");
    if (n == 0 || n % 2 != 0) throw InputError("gen_hard_easy_mixture: n must be positive and even");
    if (!(stripe_width > 0.0)) throw InputError("gen_hard_easy_mixture: stripe_width must be > 0");

    const HardEasyGeometry g = hard_easy_geometry();
    auto place = [&](double along, double signed_dist) {
        return Vector{along * g.tangent[0] + signed_dist * g.normal[0],
                      along * g.tangent[1] + signed_dist * g.normal[1]};
    };

    Rng rng(seed);
    Dataset d;
    const std::size_t n_hard = 2 * static_cast<std::size_t>(std::llround(hard_fraction * static_cast<double>(n) / 2.0));
    for (std::size_t i = 0; i + 1 < n_hard; i += 2) {
        const double along = rng.uniform(-2.0, 2.0);
        const double r = rng.uniform(0.0, margin_hard);
        const std::size_t stripe = static_cast<std::size_t>(std::floor((along + 2.0) / stripe_width)) % 2;
        for (double side : {1.0, -1.0}) {
            d.features.push_back(place(along, side * r));
            d.labels.push_back(stripe);
            d.difficulty.push_back(Difficulty::Hard);
        }
    }
    for (std::size_t i = n_hard; i < n; ++i) {
        const double along = rng.uniform(-2.0, 2.0);
        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double dist = rng.uniform(margin_easy, margin_easy + 1.0);
        d.features.push_back(place(along, side * dist));
        d.labels.push_back(side > 0.0 ? 1 : 0);
        d.difficulty.push_back(Difficulty::Easy);
    }
    return shuffled(std::move(d), rng);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    data.validate();
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < data.dim(); ++j) os << 'f' << j << ',';
    os << "label" << (data.has_difficulty() ? ",difficulty" : "") << '\n';
    os.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.features[i]) os << v << ',';
        os << data.labels[i];
        if (data.has_difficulty()) os << ',' << (data.difficulty[i] == Difficulty::Hard ? "hard" : "easy");
        os << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path.string());
    auto fail = [&](std::size_t line, const std::string& what) {
        throw FormatError(path.string() + ":" + std::to_string(line) + ": " + what);
    };
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!s.empty() && s.back() == ',') cells.emplace_back();
        return cells;
    };

    std::string line;
    if (!std::getline(is, line)) fail(1, "missing header");
    const auto header = split(line);
    std::size_t m = 0;
    while (m < header.size() && header[m] == "f" + std::to_string(m)) ++m;
    if (m == 0 || m >= header.size() || header[m] != "label") fail(1, "header must be f0,...,f{m-1},label[,difficulty]");
    const bool tagged = header.size() == m + 2;
    if (header.size() > m + 2 || (tagged && header[m + 1] != "difficulty")) fail(1, "unexpected header columns");

    Dataset d;
    std::size_t max_label = 0;
    for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) fail(lineno, "expected " + std::to_string(header.size()) + " columns");
        Vector row(m);
        try {
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t used = 0;
                row[j] = std::stod(cells[j], &used);
                if (used != cells[j].size()) fail(lineno, "bad number '" + cells[j] + "'");
            }
            std::size_t used = 0;
            const long label = std::stol(cells[m], &used);
            if (used != cells[m].size() || label < 0) fail(lineno, "bad label '" + cells[m] + "'");
            d.labels.push_back(static_cast<std::size_t>(label));
            max_label = std::max(max_label, static_cast<std::size_t>(label));
        } catch (const std::logic_error&) {
            fail(lineno, "unparseable value");
        }
        if (tagged) {
            if (cells[m + 1] == "hard") d.difficulty.push_back(Difficulty::Hard);
            else if (cells[m + 1] == "easy") d.difficulty.push_back(Difficulty::Easy);
            else fail(lineno, "difficulty must be 'easy' or 'hard'");
        }
        d.features.push_back(std::move(row));
    }
    d.n_classes = std::max<std::size_t>(2, max_label + 1);
    try {
        d.validate();
    } catch (const InputError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return d;
}

} // namespace dynalay
