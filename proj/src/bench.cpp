#include "flowpull/bench.hpp"

#include <cstdio>

#include "flowpull/keyvalue.hpp"
#include "flowpull/metrics.hpp"
#include "json.hpp"

namespace flowpull {

std::string Strategy::internal_label() const {
  switch (internal) {
    case PropagationMode::kOneShot:
      return "One.";
    case PropagationMode::kRecurrent:
      return "Rec.";
    case PropagationMode::kNone:
      return "-";
  }
  return "?";
}

std::string Strategy::reference_label() const {
  if (!reference) return "-";
  return internal == PropagationMode::kOneShot ? "One." : "Rec.";
}

std::string Strategy::id() const {
  return std::string(to_string(internal)) + (reference ? "+ref" : "");
}

std::vector<Strategy> default_strategies() {
  return {{PropagationMode::kNone, false},
          {PropagationMode::kRecurrent, false},
          {PropagationMode::kOneShot, false},
          {PropagationMode::kRecurrent, true},
          {PropagationMode::kOneShot, true}};
}

Strategy parse_strategy(const std::string& id) {
  for (const Strategy& s : default_strategies()) {
    if (s.id() == id) return s;
  }
  throw Error("unknown strategy '" + id + "'");
}

BenchSuite load_suite(const std::filesystem::path& path) {
  const KeyValueConfig config = KeyValueConfig::load(path);
  config.require_known({"scenes", "strategies", "threads"});
  BenchSuite suite;
  const auto base = path.parent_path();
  for (const std::string& rel : config.get_list("scenes")) {
    suite.scenes.push_back(scene_from_config(KeyValueConfig::load(base / rel)));
  }
  if (suite.scenes.empty()) throw Error(path.string() + ": suite lists no scenes");
  if (config.has("strategies")) {
    for (const std::string& id : config.get_list("strategies")) {
      suite.strategies.push_back(parse_strategy(id));
    }
  } else {
    suite.strategies = default_strategies();
  }
  suite.threads = config.get_int("threads", 1);
  return suite;
}

BenchRow evaluate_strategy(const Scene& scene, const Strategy& strategy, int threads) {
  PipelineOptions options;
  options.propagation = strategy.internal;
  options.reference_mode = strategy.reference ? ReferenceMode::kFile : ReferenceMode::kOff;
  options.threads = threads;
  options.positive_masks = !scene.sequence.positive_masks.empty();
  ImageListReferenceProvider truth(scene.ground_truth);
  const PipelineResult run = run_pipeline(scene.sequence, options, &truth);

  BenchRow row;
  row.strategy = strategy;
  const int length = scene.sequence.length();
  for (int i = 0; i < length; ++i) {
    row.psnr += psnr(run.frames[i], scene.ground_truth[i]);
    row.ssim += ssim(run.frames[i], scene.ground_truth[i]);
  }
  row.psnr /= length;
  row.ssim /= length;
  row.hole_psnr = pooled_psnr(run.frames, scene.ground_truth, scene.sequence.masks);
  return row;
}

std::vector<BenchRow> run_benchmark(const BenchSuite& suite) {
  std::vector<BenchRow> rows;
  for (const SceneSpec& spec : suite.scenes) {
    const Scene scene = generate_scene(spec);
    for (const Strategy& s : suite.strategies) {
      BenchRow row = evaluate_strategy(scene, s, suite.threads);
      row.scene = spec.name;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_table(const std::vector<BenchRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %-5s %-5s %9s %8s %10s\n", "scene", "Int.", "Ref.",
                "PSNR", "SSIM", "hole PSNR");
  out += line;
  for (const BenchRow& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %-5s %-5s %9.4f %8.5f %10.4f\n", r.scene.c_str(),
                  r.strategy.internal_label().c_str(), r.strategy.reference_label().c_str(),
                  r.psnr, r.ssim, r.hole_psnr);
    out += line;
  }
  return out;
}

std::string rows_to_json(const std::vector<BenchRow>& rows) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const BenchRow& r : rows) {
    list.push_back({{"scene", r.scene},
                    {"strategy", r.strategy.id()},
                    {"internal", r.strategy.internal_label()},
                    {"reference", r.strategy.reference_label()},
                    {"psnr", r.psnr},
                    {"ssim", r.ssim},
                    {"hole_psnr", r.hole_psnr}});
  }
  return list.dump(2) + "\n";
}

}  // namespace flowpull
