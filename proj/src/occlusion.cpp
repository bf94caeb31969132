#include "flowpull/occlusion.hpp"

namespace flowpull {

Mask merge_masks(const Mask& negative, const Mask& positive) {
  if (!negative.same_shape(positive)) throw Error("merge_masks: resolution mismatch");
  return mask_union(negative, positive);
}

Image overlay_positive(const Image& output, const Image& original, const Mask& positive) {
  if (!output.same_shape(original) || !output.same_shape(positive)) {
    throw Error("overlay_positive: resolution mismatch");
  }
  Image result = output;
  for (std::size_t p = 0; p < result.pixel_count(); ++p) {
    if (!positive.data()[p]) continue;
    std::copy_n(original.pixel(p), 3, result.pixel(p));
  }
  return result;
}

}  // namespace flowpull
