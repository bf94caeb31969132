#include "flowpull/fallback_fill.hpp"

#include <algorithm>

namespace flowpull {

CompletionInput assemble_completion_input(const Image& image, const Mask& remaining,
                                          const Mask& invalid) {
  if (!image.same_shape(remaining) || !image.same_shape(invalid)) {
    throw Error("assemble_completion_input: resolution mismatch");
  }
  CompletionInput in{image, Mask(image.width(), image.height(), 0)};
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    if (invalid.data()[p]) {
      float* c = in.image.pixel(p);
      c[0] = c[1] = c[2] = 0.0f;
    }
    in.hole.data()[p] = (remaining.data()[p] || invalid.data()[p]) ? 1 : 0;
  }
  return in;
}

FrameCompletion HarmonicCompleter::complete(const Image& image, const Mask& hole) const {
  if (!image.same_shape(hole)) throw Error("complete_frame: resolution mismatch");
  FrameCompletion out{image, false};
  const HarmonicStats stats =
      harmonic_fill<3>(out.image, hole, {0.5f, 0.5f, 0.5f}, options_);
  out.used_fallback = stats.unbounded_components > 0;
  for (std::size_t p = 0; p < out.image.pixel_count(); ++p) {
    if (!hole.data()[p]) continue;
    float* c = out.image.pixel(p);
    for (int k = 0; k < 3; ++k) c[k] = std::clamp(c[k], 0.0f, 1.0f);
  }
  return out;
}

FrameCompletion complete_frame(const Image& image, const Mask& hole) {
  return HarmonicCompleter().complete(image, hole);
}

}  // namespace flowpull
