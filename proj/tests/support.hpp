#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "flowpull/types.hpp"

namespace testing {

inline flowpull::Image random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  flowpull::Image img(w, h);
  for (float& v : img.data()) v = unit(rng);
  return img;
}

inline flowpull::Mask disc_mask(int w, int h, double cx, double cy, double r) {
  flowpull::Mask m(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m(x, y) = 1;
  return m;
}

inline flowpull::Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  flowpull::Mask m(w, h, 0);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m(x, y) = 1;
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("flowpull_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
