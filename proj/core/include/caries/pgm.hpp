#pragma once

#include <filesystem>

#include "caries/geometry.hpp"

namespace caries {

/// Binary 8-bit PGM ("P5", maxval 255).
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace caries
