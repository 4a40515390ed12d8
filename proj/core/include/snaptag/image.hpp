#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace snaptag {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit raster with 1 (gray), 3 (RGB) or 4 (RGBA) interleaved channels,
/// row-major.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  RasterImage() = default;
  RasterImage(int w, int h, int c, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool valid() const {
    return width >= 1 && height >= 1 &&
           (channels == 1 || channels == 3 || channels == 4) &&
           data.size() == static_cast<std::size_t>(width) * height * channels;
  }
};

/// Strictly black/white image; samples are 0 or 255.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryImage() = default;
  BinaryImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

// Image IO. PNG (via libpng), binary PPM (P6) and PGM (P5).
RasterImage read_image(const std::filesystem::path& path);
void write_pgm(const RasterImage& gray, const std::filesystem::path& path);
void write_pgm(const BinaryImage& bin, const std::filesystem::path& path);

}  // namespace snaptag
