#pragma once

#include "ptyroi/grid.hpp"

#include <cstdint>
#include <filesystem>

namespace ptyroi {

/// 8-bit grayscale PNG.
void write_png_gray(const Grid<std::uint8_t>& img, const std::filesystem::path& path);

/// Min-max normalizes `values` to 0..255 over the cells where `valid` is true
/// (all cells when valid is null); invalid cells render black.
Grid<std::uint8_t> to_gray(const Grid<double>& values, const Grid<std::uint8_t>* valid = nullptr);

}  // namespace ptyroi
