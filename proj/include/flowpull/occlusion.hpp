#pragma once

#include "flowpull/types.hpp"

namespace flowpull {

// Union of the object-to-remove mask and the occluder-to-preserve mask.
Mask merge_masks(const Mask& negative, const Mask& positive);

// `original` where `positive` is set, `output` elsewhere.
Image overlay_positive(const Image& output, const Image& original, const Mask& positive);

}  // namespace flowpull
