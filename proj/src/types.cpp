#include "flowpull/types.hpp"

#include <cmath>
#include <string>

namespace flowpull {

FlowField FlowField::constant(int width, int height, float dx, float dy) {
  FlowField flow(width, height);
  for (std::size_t i = 0; i < flow.vectors.pixel_count(); ++i) {
    flow.vectors.pixel(i)[0] = dx;
    flow.vectors.pixel(i)[1] = dy;
  }
  return flow;
}

Image make_image(int width, int height, std::vector<float> values) {
  Image image(width, height, std::move(values));
  validate_image(image);
  return image;
}

Mask make_mask(int width, int height, std::span<const float> values) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw Error("mask data size does not match dimensions");
  }
  Mask mask(width, height, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 1.0f) {
      mask.data()[i] = 1;
    } else if (values[i] != 0.0f) {
      throw Error("non-binary mask");
    }
  }
  return mask;
}

void validate_image(const Image& image) {
  if (image.empty()) throw Error("empty image");
  for (float v : image.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error("image value outside [0,1]");
    }
  }
}

void validate_mask(const Mask& mask) {
  if (mask.empty()) throw Error("empty mask");
  for (auto v : mask.data()) {
    if (v > 1) throw Error("non-binary mask");
  }
}

void validate_flow(const FlowField& flow) {
  if (flow.vectors.empty() || !flow.vectors.same_shape(flow.valid)) {
    throw Error("flow validity raster does not match flow dimensions");
  }
  validate_mask(flow.valid);
  for (std::size_t i = 0; i < flow.vectors.pixel_count(); ++i) {
    if (!flow.valid.data()[i]) continue;
    const float* v = flow.vectors.pixel(i);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
      throw Error("non-finite flow");
    }
  }
}

const Sequence& validate_sequence(const Sequence& seq) {
  const int length = seq.length();
  if (length < 1) throw Error("sequence has no frames");
  if (static_cast<int>(seq.masks.size()) != length) {
    throw Error("mask count " + std::to_string(seq.masks.size()) +
                " does not match frame count " + std::to_string(length));
  }
  const std::size_t expected_flows = static_cast<std::size_t>(length - 1);
  if (seq.flows.forward.size() != expected_flows) {
    throw Error("forward flow count " + std::to_string(seq.flows.forward.size()) +
                " != L-1 = " + std::to_string(expected_flows));
  }
  if (seq.flows.backward.size() != expected_flows) {
    throw Error("backward flow count " + std::to_string(seq.flows.backward.size()) +
                " != L-1 = " + std::to_string(expected_flows));
  }
  if (!seq.positive_masks.empty() &&
      static_cast<int>(seq.positive_masks.size()) != length) {
    throw Error("positive mask count does not match frame count");
  }

  const Image& first = seq.frames.front();
  auto check_shape = [&](const auto& raster, const std::string& what, int index) {
    if (!raster.same_shape(first)) {
      throw Error("dimension mismatch: " + what + " " + std::to_string(index));
    }
  };
  for (int i = 0; i < length; ++i) {
    check_shape(seq.frames[i], "frame", i);
    validate_image(seq.frames[i]);
    check_shape(seq.masks[i], "mask", i);
    validate_mask(seq.masks[i]);
    if (!seq.positive_masks.empty()) {
      check_shape(seq.positive_masks[i], "positive mask", i);
      validate_mask(seq.positive_masks[i]);
    }
  }
  for (std::size_t i = 0; i < expected_flows; ++i) {
    check_shape(seq.flows.forward[i].vectors, "forward flow", static_cast<int>(i));
    validate_flow(seq.flows.forward[i]);
    check_shape(seq.flows.backward[i].vectors, "backward flow", static_cast<int>(i));
    validate_flow(seq.flows.backward[i]);
  }
  return seq;
}

bool satisfies_state_invariants(const PropagationState& state,
                                std::span<const Mask> original_masks) {
  if (state.images.size() != original_masks.size() ||
      state.masks.size() != original_masks.size() ||
      state.invalid.size() != original_masks.size()) {
    return false;
  }
  for (std::size_t f = 0; f < original_masks.size(); ++f) {
    const auto original = original_masks[f].data();
    const auto remaining = state.masks[f].data();
    const auto invalid = state.invalid[f].data();
    for (std::size_t p = 0; p < original.size(); ++p) {
      if (remaining[p] > original[p] || invalid[p] > original[p]) return false;
      if (remaining[p] && invalid[p]) return false;
      if (remaining[p] || invalid[p]) {
        const float* c = state.images[f].pixel(p);
        if (c[0] != 0.0f || c[1] != 0.0f || c[2] != 0.0f) return false;
      }
    }
  }
  return true;
}

std::size_t count_set(const Mask& mask) {
  std::size_t n = 0;
  for (auto v : mask.data()) n += v != 0;
  return n;
}

Mask mask_union(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw Error("dimension mismatch in mask union");
  Mask out(a.width(), a.height(), 0);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    out.data()[i] = (a.data()[i] || b.data()[i]) ? 1 : 0;
  }
  return out;
}

}  // namespace flowpull
