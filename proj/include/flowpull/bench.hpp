#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowpull/pipeline.hpp"
#include "flowpull/synthbench.hpp"

namespace flowpull {

struct Strategy {
  PropagationMode internal = PropagationMode::kOneShot;
  bool reference = false;

  // Table labels: "One." / "Rec." / "-".
  std::string internal_label() const;
  std::string reference_label() const;
  std::string id() const;  // oneshot, oneshot+ref, recurrent, ...
};

// The ablation grid: no propagation, then {recurrent, one-shot} without and
// with reference.
std::vector<Strategy> default_strategies();
Strategy parse_strategy(const std::string& id);

struct BenchRow {
  std::string scene;
  Strategy strategy;
  double psnr = 0.0;       // mean over frames, full frame
  double ssim = 0.0;       // mean over frames
  double hole_psnr = 0.0;  // pooled over the hole pixels of all frames
};

struct BenchSuite {
  std::vector<SceneSpec> scenes;
  std::vector<Strategy> strategies;
  int threads = 1;
};

// Keys: scenes (comma-separated scene config paths, relative to the suite
// file), strategies (optional, ids from Strategy::id), threads.
BenchSuite load_suite(const std::filesystem::path& path);

// Runs one strategy on a generated scene. The reference for key frames is the
// ground-truth background.
BenchRow evaluate_strategy(const Scene& scene, const Strategy& strategy, int threads = 1);

std::vector<BenchRow> run_benchmark(const BenchSuite& suite);

std::string format_table(const std::vector<BenchRow>& rows);
std::string rows_to_json(const std::vector<BenchRow>& rows);

}  // namespace flowpull
