#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowpull/fallback_fill.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

// Sum over every frame j (the frame itself included) of the bilinearly warped
// residual mask of j, sampled through the chained map i -> j, restricted to
// the residual mask of i. Samples whose chain left the frame count zero.
double connection_count(const PropagationState& state, const FlowSet& flows, int frame);

std::vector<double> connection_counts(const PropagationState& state, const FlowSet& flows,
                                      int threads = 1);

// Index of the largest count, lowest index on ties. Empty input -> nullopt.
std::optional<int> argmax_lowest(std::span<const double> counts);

// Key frame maximizing the connection count; nullopt when no frame has
// residual holes (no key frame needed).
std::optional<int> select_key_frame(const PropagationState& state, const FlowSet& flows,
                                    int threads = 1);

// Writes the reference colors into the residual hole of frame `key` and clears
// that hole. Returns the pixels that became reference-sourced.
Mask ingest_reference(PropagationState& state, int key, const Image& reference);

struct PropagatedReference {
  std::vector<Image> images;  // frames after reference propagation
  std::vector<Mask> masks;    // pixels whose pull from the key frame was invalid
  std::vector<Mask> filled;   // pixels that received key-frame colors
};

// Pulls key-frame colors into every other frame's residual hole through the
// chained map i -> key. Pixels outside the residual holes are never touched.
PropagatedReference propagate_reference(const PropagationState& state, const FlowSet& flows,
                                        int key, int threads = 1);

// Supplies the reference image for a requested key frame. Returning nullopt
// (or throwing) aborts the current round.
class ReferenceProvider {
 public:
  virtual ~ReferenceProvider() = default;
  virtual std::optional<Image> reference_for(int key, const PropagationState& state) = 0;
};

// Reads <directory>/<name of frame key>.png.
class FileReferenceProvider final : public ReferenceProvider {
 public:
  FileReferenceProvider(std::filesystem::path directory, std::vector<std::string> frame_names)
      : directory_(std::move(directory)), frame_names_(std::move(frame_names)) {}
  std::optional<Image> reference_for(int key, const PropagationState& state) override;
  std::filesystem::path path_for(int key) const;

 private:
  std::filesystem::path directory_;
  std::vector<std::string> frame_names_;
};

// Completes the key frame on its own with a single-frame completer.
class FallbackReferenceProvider final : public ReferenceProvider {
 public:
  explicit FallbackReferenceProvider(const FrameCompleter& completer) : completer_(completer) {}
  std::optional<Image> reference_for(int key, const PropagationState& state) override;

 private:
  const FrameCompleter& completer_;
};

// Serves fixed images, one per frame (e.g. ground truth in benchmarks).
class ImageListReferenceProvider final : public ReferenceProvider {
 public:
  explicit ImageListReferenceProvider(const std::vector<Image>& images) : images_(images) {}
  std::optional<Image> reference_for(int key, const PropagationState& state) override;

 private:
  const std::vector<Image>& images_;
};

enum class KeyLoopStatus { kComplete, kRoundLimit, kProviderFailed };

struct KeyRound {
  int key = 0;
  double connection_count = 0.0;
  std::size_t ingested = 0;    // reference pixels written into the key frame
  std::size_t propagated = 0;  // pixels filled in other frames
  std::size_t residual = 0;    // still-missing pixels after the round
};

struct KeyLoopResult {
  PropagationState state;  // images and masks after all rounds
  std::vector<Mask> reference_sourced;
  std::vector<KeyRound> rounds;
  KeyLoopStatus status = KeyLoopStatus::kComplete;
  std::optional<int> failed_key;  // key frame whose reference was unavailable
};

// Repeats key selection, ingestion and propagation until no residual hole is
// left or `max_rounds` rounds have run.
KeyLoopResult multi_key_loop(PropagationState state, const FlowSet& flows,
                             ReferenceProvider& provider, int max_rounds = 3,
                             int threads = 1);

const char* to_string(KeyLoopStatus status);

}  // namespace flowpull
