#pragma once

#include <array>
#include <cmath>

#include "flowpull/types.hpp"

namespace flowpull {

template <int C>
struct SampledValue {
  std::array<float, C> value{};
  bool valid = false;
};

namespace detail {

// Integer neighbors and weights of a bilinear tap. A neighbor that carries
// zero weight (the sample sits exactly on a row or column) collapses onto
// its partner, so integer positions touch one pixel only.
struct BilinearTaps {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double fx = 0.0, fy = 0.0;
};

inline bool bilinear_taps(int width, int height, double x, double y, BilinearTaps& taps) {
  // Written so NaN fails the test.
  if (!(x >= 0.0 && y >= 0.0 && x <= width - 1 && y <= height - 1)) return false;
  taps.x0 = static_cast<int>(std::floor(x));
  taps.y0 = static_cast<int>(std::floor(y));
  taps.fx = x - taps.x0;
  taps.fy = y - taps.y0;
  taps.x1 = taps.fx > 0.0 ? taps.x0 + 1 : taps.x0;
  taps.y1 = taps.fy > 0.0 ? taps.y0 + 1 : taps.y0;
  return true;
}

}  // namespace detail

// Bilinear sample of `field` at (x, y). `reject(x, y)` vetoes a contributing
// neighbor; any veto or an out-of-bounds tap invalidates the sample.
template <typename T, int C, typename Reject>
SampledValue<C> sample_bilinear_if(const Raster<T, C>& field, double x, double y,
                                   Reject&& reject) {
  SampledValue<C> out;
  detail::BilinearTaps t;
  if (!detail::bilinear_taps(field.width(), field.height(), x, y, t)) return out;
  if (reject(t.x0, t.y0) || reject(t.x1, t.y0) || reject(t.x0, t.y1) ||
      reject(t.x1, t.y1)) {
    return out;
  }
  const double w00 = (1.0 - t.fx) * (1.0 - t.fy);
  const double w10 = t.fx * (1.0 - t.fy);
  const double w01 = (1.0 - t.fx) * t.fy;
  const double w11 = t.fx * t.fy;
  const T* p00 = &field(t.x0, t.y0);
  const T* p10 = &field(t.x1, t.y0);
  const T* p01 = &field(t.x0, t.y1);
  const T* p11 = &field(t.x1, t.y1);
  for (int c = 0; c < C; ++c) {
    out.value[c] = static_cast<float>(w00 * p00[c] + w10 * p10[c] + w01 * p01[c] +
                                      w11 * p11[c]);
  }
  out.valid = true;
  return out;
}

// `missing` (optional) marks unusable source pixels with 1.
template <typename T, int C>
SampledValue<C> bilinear_sample(const Raster<T, C>& field, const Mask* missing,
                                double x, double y) {
  if (missing == nullptr) {
    return sample_bilinear_if(field, x, y, [](int, int) { return false; });
  }
  return sample_bilinear_if(field, x, y,
                            [missing](int u, int v) { return (*missing)(u, v) != 0; });
}

template <int C>
struct WarpResult {
  Raster<float, C> values;
  Mask valid;
};

// Backward warp: out(p) = A(p + B(p)). Output is valid iff B is valid at p and
// the sample is in-bounds over source pixels that are not marked in
// `a_missing`. Invalid outputs hold zeros.
template <typename T, int C>
WarpResult<C> grid_warp(const Raster<T, C>& a, const Mask* a_missing, const FlowField& b) {
  if (!a.same_shape(b.vectors) || (a_missing && !a_missing->same_shape(a))) {
    throw Error("grid_warp: resolution mismatch");
  }
  WarpResult<C> out{Raster<float, C>(a.width(), a.height(), 0.0f),
                    Mask(a.width(), a.height(), 0)};
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!b.is_valid(x, y)) continue;
      const auto s = bilinear_sample(a, a_missing, x + static_cast<double>(b.dx(x, y)),
                                     y + static_cast<double>(b.dy(x, y)));
      if (!s.valid) continue;
      for (int c = 0; c < C; ++c) out.values(x, y, c) = s.value[c];
      out.valid(x, y) = 1;
    }
  }
  return out;
}

// Flow-on-flow warp; source validity comes from a.valid.
inline FlowField grid_warp(const FlowField& a, const FlowField& b) {
  if (!a.vectors.same_shape(b.vectors)) throw Error("grid_warp: resolution mismatch");
  FlowField out(a.width(), a.height());
  out.valid.fill(0);
  const auto reject = [&a](int u, int v) { return a.valid(u, v) == 0; };
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!b.is_valid(x, y)) continue;
      const auto s = sample_bilinear_if(a.vectors, x + static_cast<double>(b.dx(x, y)),
                                        y + static_cast<double>(b.dy(x, y)), reject);
      if (!s.valid) continue;
      out.vectors(x, y, 0) = s.value[0];
      out.vectors(x, y, 1) = s.value[1];
      out.valid(x, y) = 1;
    }
  }
  return out;
}

}  // namespace flowpull
