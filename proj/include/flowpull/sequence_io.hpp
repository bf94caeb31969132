#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowpull/synthbench.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

// On-disk layout: <frames>/00000.png ...; <masks>/00000.png (same stems);
// optional <masks>/00000_pos.png; <flows>/fwd_00000.flo and bwd_00000.flo for
// the pair (i, i+1), numbered by the first frame.
std::string frame_stem(int index);
std::string positive_mask_name(const std::string& stem);
std::string forward_flow_name(const std::string& stem);
std::string backward_flow_name(const std::string& stem);

// Stems of the frames in `dir`, sorted. The stems must be consecutive
// five-digit numbers.
std::vector<std::string> list_frames(const std::filesystem::path& dir);

struct SequencePaths {
  std::filesystem::path frames;
  std::filesystem::path masks;
  std::filesystem::path flows;
};

struct LoadedSequence {
  Sequence sequence;
  std::vector<std::string> names;
};

// Reads frames, masks and flows. Positive masks are read only when
// `positive_masks` is set; a missing file means an empty mask.
LoadedSequence load_sequence(const SequencePaths& paths, bool positive_masks);

void write_frames(const std::vector<Image>& frames, const std::vector<std::string>& names,
                  const std::filesystem::path& dir);

// Writes frames/, masks/, flows/ and gt/ under `root`.
void write_scene(const Scene& scene, const std::filesystem::path& root);

}  // namespace flowpull
