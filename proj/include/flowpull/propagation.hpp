#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "flowpull/types.hpp"
#include "flowpull/warp.hpp"

namespace flowpull {

// Maps pixels of frame `target` to positions in frame `source`:
// source position of p is p + flow(p).
struct CorrespondenceMap {
  int target = 0;
  int source = 0;
  FlowField flow;
};

// The chain base: zero displacement, valid everywhere.
CorrespondenceMap identity_map(int frame, int width, int height);

// Advances one chained displacement (dx, dy) of pixel (x, y) through the
// adjacent flow leading to the next source frame. Returns false, leaving the
// displacement untouched, when the chain leaves the frame or hits an invalid
// flow sample.
inline bool advance_chain(const FlowField& adjacent, int x, int y, float& dx, float& dy) {
  const auto s = sample_bilinear_if(
      adjacent.vectors, x + static_cast<double>(dx), y + static_cast<double>(dy),
      [&adjacent](int u, int v) { return adjacent.valid(u, v) == 0; });
  if (!s.valid) return false;
  dx = dx + s.value[0];
  dy = dy + s.value[1];
  return true;
}

// The adjacent flow that extends a chain from frame `from` to `to` (|to-from| = 1):
// forward[from] when moving up, backward[to] when moving down.
const FlowField& adjacent_flow(const FlowSet& flows, int from, int to);

// One chaining step: f(target -> to) = f(target -> from) + w(f(from -> to), f(target -> from)).
// `to` must be acc.source +/- 1, moving away from acc.target.
CorrespondenceMap chain_step(const CorrespondenceMap& acc, const FlowSet& flows, int to);

// Dense chained map target -> source built by repeated chain_step.
CorrespondenceMap chain_to(const FlowSet& flows, int target, int source);

enum class Direction { kForward, kBackward };  // kForward scans sources j > i

struct VerifyResult {
  std::optional<Color> color;
  bool invalid = false;
};

// Reconciles the two directional candidates. Agreement within `threshold`
// (L1 over the three normalized channels) yields their mean; disagreement
// yields no color and flags the pixel unreliable. A single candidate is
// accepted as-is.
VerifyResult verify_pair(const std::optional<Color>& forward,
                         const std::optional<Color>& backward, double threshold = 1.0);

struct ProvenanceRecord {
  int target = 0;
  int x = 0;
  int y = 0;
  Direction direction = Direction::kForward;
  int source = 0;
  double source_x = 0.0;
  double source_y = 0.0;
  Color color{};  // the single bilinear sample taken from the original source frame
};

struct CollectOptions {
  double verify_threshold = 1.0;
  int threads = 1;
  bool record_provenance = false;
};

struct CollectResult {
  PropagationState state;
  // Filled pixels only, ordered by target, raster position, then direction.
  std::vector<ProvenanceRecord> provenance;
};

// Bi-directional one-shot pixel collection. For each target frame two passes
// (sources after and before the target, nearest first) chain the adjacent
// flows per still-unfilled hole pixel and pull the color with a single
// bilinear sample of the original source frame as soon as the chained
// position lands on known pixels. The candidates are then verified.
CollectResult collect_bidirectional(const Sequence& seq, const FlowSet& completed,
                                    const CollectOptions& options = {});

void write_provenance(const std::vector<ProvenanceRecord>& records,
                      const std::filesystem::path& path);

}  // namespace flowpull
