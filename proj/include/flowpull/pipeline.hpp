#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowpull/fallback_fill.hpp"
#include "flowpull/propagation.hpp"
#include "flowpull/reference.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

enum class ReferenceMode { kFile, kFallback, kOff };
enum class PropagationMode { kOneShot, kRecurrent, kNone };

const char* to_string(ReferenceMode mode);
const char* to_string(PropagationMode mode);
ReferenceMode parse_reference_mode(const std::string& text);

struct PipelineOptions {
  int dilate_radius = 0;
  double verify_threshold = 1.0;
  int max_key_rounds = 3;
  ReferenceMode reference_mode = ReferenceMode::kFile;
  bool positive_masks = false;
  int threads = 1;
  bool record_provenance = false;
  PropagationMode propagation = PropagationMode::kOneShot;
};

struct FrameStats {
  std::size_t hole = 0;  // pixels to fill after dilation and mask merging
  std::size_t filled = 0;
  std::size_t invalid = 0;
  std::size_t residual_after_propagation = 0;
  std::size_t reference_filled = 0;
  std::size_t completed = 0;  // pixels handed to per-frame completion
};

struct StageRecord {
  std::string name;
  bool ran = false;
  double seconds = 0.0;
};

struct RunReport {
  int frames = 0;
  int width = 0;
  int height = 0;
  PipelineOptions options;
  std::vector<StageRecord> stages;  // execution order
  std::vector<KeyRound> key_rounds;
  std::string reference_status = "not_needed";
  std::optional<int> requested_key;  // key frame whose reference file was missing
  std::vector<int> flow_fallback_forward;
  std::vector<int> flow_fallback_backward;
  std::vector<int> frame_fallbacks;
  std::vector<FrameStats> per_frame;

  void add_stage(const std::string& name, bool ran, double seconds);
  // Deterministic content only; timings go to timings_json().
  std::string to_json() const;
  std::string timings_json() const;
};

struct PipelineResult {
  std::vector<Image> frames;
  RunReport report;
  std::vector<ProvenanceRecord> provenance;
};

// Runs the full removal pipeline on an in-memory sequence. `provider` is used
// when the options ask for a reference; when null, key frames are completed
// with `completer`. `completer` defaults to harmonic fill.
PipelineResult run_pipeline(Sequence seq, const PipelineOptions& options,
                            ReferenceProvider* provider = nullptr,
                            const FrameCompleter* completer = nullptr);

}  // namespace flowpull
