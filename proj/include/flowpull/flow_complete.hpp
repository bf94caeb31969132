#pragma once

#include "flowpull/harmonic.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

struct FlowCompletion {
  FlowField flow;
  // Set when a hole component had no known boundary (whole-frame mask) and
  // was filled with zero flow.
  bool used_fallback = false;
  HarmonicStats stats;
};

// Erases the flow inside `mask` (and wherever the input is invalid) and infills
// each component by harmonic extension of the surrounding flow. The output is
// valid everywhere; known, valid pixels are copied bit-exactly.
FlowCompletion complete_flow(const FlowField& flow, const Mask& mask,
                             const HarmonicOptions& options = {});

// Completes every adjacent flow of `flows` in place: forward[i] is erased with
// masks[i], backward[i] with masks[i + 1]. Returns the indices of pairs whose
// completion fell back to zero flow, forward pairs first.
struct FlowSetCompletion {
  std::vector<int> forward_fallbacks;
  std::vector<int> backward_fallbacks;
};
FlowSetCompletion complete_flows(FlowSet& flows, std::span<const Mask> masks,
                                 int threads = 1);

}  // namespace flowpull
