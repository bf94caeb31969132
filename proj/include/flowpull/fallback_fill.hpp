#pragma once

#include "flowpull/harmonic.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

struct FrameCompletion {
  Image image;
  // Set when the hole covered the whole frame and mid-gray was used.
  bool used_fallback = false;
};

// Operands of the per-frame completion call: the image with unreliable
// pixels zeroed and the union of still-missing and unreliable pixels.
struct CompletionInput {
  Image image;
  Mask hole;
};

CompletionInput assemble_completion_input(const Image& image, const Mask& remaining,
                                          const Mask& invalid);

// Single-frame hole filler. Implementations must leave known pixels untouched
// and return values in [0,1].
class FrameCompleter {
 public:
  virtual ~FrameCompleter() = default;
  virtual FrameCompletion complete(const Image& image, const Mask& hole) const = 0;
};

// Per-channel harmonic extension of the boundary colors, clamped to [0,1].
class HarmonicCompleter final : public FrameCompleter {
 public:
  explicit HarmonicCompleter(HarmonicOptions options = {}) : options_(options) {}
  FrameCompletion complete(const Image& image, const Mask& hole) const override;

 private:
  HarmonicOptions options_;
};

FrameCompletion complete_frame(const Image& image, const Mask& hole);

}  // namespace flowpull
