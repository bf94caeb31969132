#pragma once

#include <span>

#include "flowpull/types.hpp"

namespace flowpull {

inline constexpr double kPsnrCap = 99.0;

double mean_squared_error(const Image& a, const Image& b);

// 10 log10(1 / MSE) on [0,1] data, capped at kPsnrCap.
double psnr(const Image& a, const Image& b);

// PSNR over the pixels set in `region`, pooled across all given frames.
// Returns kPsnrCap when the regions are empty or the error is zero.
double pooled_psnr(std::span<const Image> a, std::span<const Image> b,
                   std::span<const Mask> region);

// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over the three channels.
// Both images must be at least 11x11.
double ssim(const Image& a, const Image& b);

}  // namespace flowpull
