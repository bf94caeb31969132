#pragma once

#include <array>

#include "flowpull/types.hpp"

namespace flowpull {

struct HarmonicOptions {
  double tolerance = 1e-6;  // max |mean(neighbors) - u| over the hole
  int max_sweeps = 10000;
};

struct HarmonicStats {
  int components = 0;
  // Components with no known 4-neighbor at all (whole-frame holes); these
  // receive the fallback value.
  int unbounded_components = 0;
  int max_sweeps_used = 0;
  bool converged = true;
};

// Replaces every hole pixel of `field` by the discrete harmonic extension of
// the surrounding known pixels, independently per channel: each hole pixel
// equals the mean of its in-image 4-neighbors. Neighbors outside the image
// are dropped, so holes touching the border use the available ring only.
// Solved per 4-connected component by successive over-relaxation.
// Known pixels are never written.
template <int C>
HarmonicStats harmonic_fill(Raster<float, C>& field, const Mask& hole,
                            const std::array<float, C>& fallback,
                            const HarmonicOptions& options = {});

}  // namespace flowpull
