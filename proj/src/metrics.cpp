#include "flowpull/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace flowpull {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWindow> gaussian_kernel() {
  std::array<double, kWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable 'valid' Gaussian filter of a single plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h) {
  static const auto kernel = gaussian_kernel();
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += kernel[k] * plane[static_cast<std::size_t>(y) * w + x + k];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += kernel[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double mean_squared_error(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error("metric: resolution mismatch");
  double sum = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sum += d * d;
  }
  return sum / static_cast<double>(da.size());
}

double psnr(const Image& a, const Image& b) {
  const double mse = mean_squared_error(a, b);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double pooled_psnr(std::span<const Image> a, std::span<const Image> b,
                   std::span<const Mask> region) {
  if (a.size() != b.size() || a.size() != region.size()) {
    throw Error("pooled_psnr: frame counts differ");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (!a[f].same_shape(b[f]) || !a[f].same_shape(region[f])) {
      throw Error("metric: resolution mismatch");
    }
    for (std::size_t p = 0; p < a[f].pixel_count(); ++p) {
      if (!region[f].data()[p]) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(a[f].pixel(p)[c]) - b[f].pixel(p)[c];
        sum += d * d;
      }
      count += 3;
    }
  }
  if (count == 0 || sum <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(static_cast<double>(count) / sum));
}

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error("metric: resolution mismatch");
  const int w = a.width();
  const int h = a.height();
  if (w < kWindow || h < kWindow) throw Error("ssim: image smaller than the 11x11 window");
  const std::size_t n = a.pixel_count();
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t p = 0; p < n; ++p) {
      x[p] = a.pixel(p)[c];
      y[p] = b.pixel(p)[c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, w, h);
    const auto my = filter_valid(y, w, h);
    const auto mxx = filter_valid(xx, w, h);
    const auto myy = filter_valid(yy, w, h);
    const auto mxy = filter_valid(xy, w, h);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cxy = mxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / 3.0;
}

}  // namespace flowpull
