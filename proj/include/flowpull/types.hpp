#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "flowpull/raster.hpp"

namespace flowpull {

// Color raster, channels normalized to [0,1].
using Image = Raster<float, 3>;

// Binary raster. In hole masks 1 marks a missing pixel; in validity rasters
// 1 marks a usable sample. Values are always 0 or 1.
using Mask = Raster<std::uint8_t, 1>;

using Color = std::array<float, 3>;

// Per-pixel displacement in pixels (dx rightward, dy downward) with validity.
struct FlowField {
  Raster<float, 2> vectors;
  Mask valid;

  FlowField() = default;
  FlowField(int width, int height) : vectors(width, height, 0.0f), valid(width, height, 1) {}

  static FlowField constant(int width, int height, float dx, float dy);

  int width() const { return vectors.width(); }
  int height() const { return vectors.height(); }
  float dx(int x, int y) const { return vectors(x, y, 0); }
  float dy(int x, int y) const { return vectors(x, y, 1); }
  bool is_valid(int x, int y) const { return valid(x, y) != 0; }

  bool operator==(const FlowField&) const = default;
};

// Adjacent-pair flows: forward[i] maps frame i to i+1, backward[i] maps frame
// i+1 to i.
struct FlowSet {
  std::vector<FlowField> forward;
  std::vector<FlowField> backward;
};

struct Sequence {
  std::vector<Image> frames;
  std::vector<Mask> masks;
  FlowSet flows;
  // Empty, or one mask per frame marking occluders to preserve.
  std::vector<Mask> positive_masks;

  int length() const { return static_cast<int>(frames.size()); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
};

// Outcome of bi-directional collection: updated images, still-missing masks
// and the unreliable-propagation indicator. Images hold 0 wherever the
// pixel is still missing or unreliable.
struct PropagationState {
  std::vector<Image> images;
  std::vector<Mask> masks;
  std::vector<Mask> invalid;

  int length() const { return static_cast<int>(images.size()); }
};

// Checked constructors. Throw Error on any invariant violation.
Image make_image(int width, int height, std::vector<float> values);
Mask make_mask(int width, int height, std::span<const float> values);

void validate_image(const Image& image);
void validate_mask(const Mask& mask);
void validate_flow(const FlowField& flow);

// Returns seq iff every invariant holds, otherwise throws Error.
const Sequence& validate_sequence(const Sequence& seq);

// Pointwise masks <= original and invalid <= original, invalid disjoint from
// masks, and images zero wherever masks or invalid are set.
bool satisfies_state_invariants(const PropagationState& state,
                                std::span<const Mask> original_masks);

std::size_t count_set(const Mask& mask);
Mask mask_union(const Mask& a, const Mask& b);

}  // namespace flowpull
