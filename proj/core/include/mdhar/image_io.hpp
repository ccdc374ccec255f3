#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mdhar/matrix.hpp"

namespace mdhar {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit quantisation of [0, 1] values (clamped, round to nearest).
std::uint8_t to_gray8(double v);

void write_png_gray(const Matrix<double>& img, const std::filesystem::path& path);
void write_png_rgb(const Matrix<Rgb>& img, const std::filesystem::path& path);

/// Gray or RGB PNG read back as [0, 1] values (RGB converted by channel mean).
Matrix<double> read_png_gray(const std::filesystem::path& path);
Matrix<Rgb> read_png_rgb(const std::filesystem::path& path);

}  // namespace mdhar
