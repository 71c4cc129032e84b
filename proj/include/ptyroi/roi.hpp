#pragma once

#include "ptyroi/grid.hpp"

#include <cstdint>

namespace ptyroi {

/// Boolean selection over the scan grid. `cells` may be true only where
/// `occupied` is true (a frame exists at that scan position).
struct RoiMask {
    Grid<std::uint8_t> cells;
    Grid<std::uint8_t> occupied;

    std::size_t count_true() const {
        std::size_t n = 0;
        for (auto v : cells.flat()) n += v != 0;
        return n;
    }
    std::size_t count_occupied() const {
        std::size_t n = 0;
        for (auto v : occupied.flat()) n += v != 0;
        return n;
    }
};

}  // namespace ptyroi
