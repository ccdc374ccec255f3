#include "mdhar/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mdhar/error.hpp"

namespace mdhar {
namespace {

void write_png(const std::filesystem::path& path, std::uint32_t width, std::uint32_t height,
               png_uint_32 format, const void* pixels) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = width;
  image.height = height;
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, pixels, 0, nullptr) == 0) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

template <typename Pixel>
Matrix<Pixel> read_png(const std::filesystem::path& path, png_uint_32 format) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = format;
  Matrix<Pixel> out(image.height, image.width);
  if (png_image_finish_read(&image, nullptr, out.data().data(), 0, nullptr) == 0) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

}  // namespace

std::uint8_t to_gray8(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<std::uint8_t>(std::lround(std::min(v, 1.0) * 255.0));
}

void write_png_gray(const Matrix<double>& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> px(img.size());
  std::transform(img.data().begin(), img.data().end(), px.begin(), to_gray8);
  write_png(path, static_cast<std::uint32_t>(img.cols()), static_cast<std::uint32_t>(img.rows()),
            PNG_FORMAT_GRAY, px.data());
}

void write_png_rgb(const Matrix<Rgb>& img, const std::filesystem::path& path) {
  static_assert(sizeof(Rgb) == 3);
  write_png(path, static_cast<std::uint32_t>(img.cols()), static_cast<std::uint32_t>(img.rows()),
            PNG_FORMAT_RGB, img.data().data());
}

Matrix<double> read_png_gray(const std::filesystem::path& path) {
  const auto raw = read_png<std::uint8_t>(path, PNG_FORMAT_GRAY);
  Matrix<double> out(raw.rows(), raw.cols());
  std::transform(raw.data().begin(), raw.data().end(), out.data().begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return out;
}

Matrix<Rgb> read_png_rgb(const std::filesystem::path& path) {
  return read_png<Rgb>(path, PNG_FORMAT_RGB);
}

}  // namespace mdhar
