#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowpull {

// All recoverable failures (bad input, invariant violations, I/O) surface as
// this exception type. The message names the offending item.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major raster with C interleaved channels.
template <typename T, int C>
class Raster {
 public:
  static constexpr int kChannels = C;
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw Error("raster dimensions must be positive, got " +
                  std::to_string(width) + "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * C, fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1) {
      throw Error("raster dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height * C) {
      throw Error("raster data size does not match dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * C + c];
  }
  const T& operator()(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * C + c];
  }

  // Linear pixel index access (index = y * width + x).
  T* pixel(std::size_t index) { return data_.data() + index * C; }
  const T* pixel(std::size_t index) const { return data_.data() + index * C; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  template <typename U, int D>
  bool same_shape(const Raster<U, D>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

}  // namespace flowpull
