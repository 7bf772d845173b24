#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace probe {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 8-bit grayscale image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  Image() = default;
  Image(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x];
  }
};

Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

/// Separable Gaussian blur; sigma <= 0 returns the input unchanged.
Image gaussian_blur(const Image& img, double sigma);

} // namespace probe
