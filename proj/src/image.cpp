#include "probe/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace probe {

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PGM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("not a binary PGM (P5) file: " + path);

  auto next_token = [&in, &path]() {
    // skip whitespace and '#' comment lines
    int tok;
    for (;;) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        continue;
      }
      if (!(in >> tok)) throw IoError("truncated PGM header: " + path);
      return tok;
    }
  };

  const int w = next_token();
  const int h = next_token();
  const int maxval = next_token();
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw IoError("unsupported PGM header in " + path);
  }
  in.get(); // single whitespace after maxval
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw IoError("truncated PGM data: " + path);
  }
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PGM file: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("short write on PGM file: " + path);
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const auto clampx = [&img](int x) {
    return std::clamp(x, 0, img.width - 1);
  };
  const auto clampy = [&img](int y) {
    return std::clamp(y, 0, img.height - 1);
  };

  std::vector<double> tmp(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        v += kernel[i + radius] * img.at(clampx(x + i), y);
      }
      tmp[static_cast<size_t>(y) * img.width + x] = v;
    }
  }
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        v += kernel[i + radius] *
             tmp[static_cast<size_t>(clampy(y + i)) * img.width + x];
      }
      out.at(x, y) = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return out;
}

} // namespace probe
