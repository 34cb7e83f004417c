#pragma once

#include <cstddef>
#include <string>

namespace dynalay {

/// The agent's decision alphabet. Index 0 is Nop; index i + 1 is Fpi(i).
struct Action {
    enum class Kind { Nop, Fpi };

    Kind kind = Kind::Nop;
    std::size_t layer = 0;

    static Action nop() noexcept { return {Kind::Nop, 0}; }
    static Action fpi(std::size_t layer) noexcept { return {Kind::Fpi, layer}; }
    static Action from_index(std::size_t index) noexcept { return index == 0 ? nop() : fpi(index - 1); }

    bool is_nop() const noexcept { return kind == Kind::Nop; }
    std::size_t index() const noexcept { return is_nop() ? 0 : layer + 1; }
    std::string name() const { return is_nop() ? "nop" : "fpi" + std::to_string(layer); }

    friend bool operator==(const Action&, const Action&) = default;
};

} // namespace dynalay
