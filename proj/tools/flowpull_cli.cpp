#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "flowpull/bench.hpp"
#include "flowpull/keyvalue.hpp"
#include "flowpull/media_io.hpp"
#include "flowpull/pipeline.hpp"
#include "flowpull/sequence_io.hpp"
#include "flowpull/synthbench.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace flowpull;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct InpaintArgs {
  std::string frames, masks, flows, out, references;
  std::string report, provenance;
  std::string estimate = "external";
  std::string reference_mode = "file";
  PipelineOptions options;
};

int run_inpaint(const InpaintArgs& args) {
  if (args.estimate != "external") {
    throw Error("estimate=" + args.estimate +
                " is not supported; flows must be supplied (estimate=external)");
  }
  PipelineOptions options = args.options;
  options.reference_mode = parse_reference_mode(args.reference_mode);
  options.record_provenance = !args.provenance.empty();

  LoadedSequence loaded =
      load_sequence({args.frames, args.masks, args.flows}, options.positive_masks);
  std::unique_ptr<ReferenceProvider> provider;
  if (options.reference_mode == ReferenceMode::kFile) {
    const fs::path dir = args.references.empty() ? fs::path(args.out) / "references"
                                                 : fs::path(args.references);
    provider = std::make_unique<FileReferenceProvider>(dir, loaded.names);
  }
  PipelineResult result = run_pipeline(std::move(loaded.sequence), options, provider.get());

  const auto start = std::chrono::steady_clock::now();
  write_frames(result.frames, loaded.names, fs::path(args.out) / "frames");
  result.report.add_stage(
      "write_frames", true,
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

  const fs::path report = args.report.empty() ? fs::path(args.out) / "report.json"
                                              : fs::path(args.report);
  write_text(report, result.report.to_json());
  write_text(report.parent_path() / "timings.json", result.report.timings_json());
  if (!args.provenance.empty()) write_provenance(result.provenance, args.provenance);

  if (result.report.requested_key) {
    const int key = *result.report.requested_key;
    std::cerr << "reference for key frame " << key << " not found";
    if (auto* files = dynamic_cast<FileReferenceProvider*>(provider.get())) {
      std::cerr << " (expected " << files->path_for(key).string() << ")";
    }
    std::cerr << "; residual holes were completed per frame\n";
  }
  return 0;
}

int run_synth(const std::string& scene_path, const std::string& out) {
  const SceneSpec spec = scene_from_config(KeyValueConfig::load(scene_path));
  write_scene(generate_scene(spec), out);
  return 0;
}

int run_bench(const std::string& suite_path, const std::string& json_path, int threads,
              bool threads_given) {
  BenchSuite suite = load_suite(suite_path);
  if (threads_given) suite.threads = threads;
  const auto rows = run_benchmark(suite);
  std::cout << format_table(rows);
  if (!json_path.empty()) write_text(json_path, rows_to_json(rows));
  return 0;
}

FlowSet read_flow_dir(const fs::path& dir) {
  FlowSet flows;
  for (int i = 0;; ++i) {
    const fs::path fwd = dir / forward_flow_name(frame_stem(i));
    if (!fs::exists(fwd)) break;
    const fs::path bwd = dir / backward_flow_name(frame_stem(i));
    if (!fs::exists(bwd)) throw Error("missing flow: " + bwd.string());
    flows.forward.push_back(read_flow(fwd));
    flows.backward.push_back(read_flow(bwd));
  }
  if (flows.forward.empty()) throw Error("no fwd_00000.flo in " + dir.string());
  return flows;
}

int run_flowcheck(const std::string& flow_dir, int width, int height, int length,
                  std::uint64_t seed, double tolerance, double required) {
  const FlowSet flows = flow_dir.empty() ? random_smooth_flows(width, height, length, seed)
                                         : read_flow_dir(flow_dir);
  const int frames = static_cast<int>(flows.forward.size()) + 1;
  OracleAgreement total;
  for (int from = 0; from < frames; ++from) {
    for (int to = 0; to < frames; ++to) {
      if (from != to) total.merge(compare_with_trace(flows, from, to, tolerance));
    }
  }
  nlohmann::ordered_json j = {{"frames", frames},
                              {"tolerance", tolerance},
                              {"jointly_valid", total.jointly_valid},
                              {"agreeing", total.agreeing},
                              {"fraction", total.fraction()},
                              {"chain_only", total.chain_only},
                              {"trace_only", total.trace_only},
                              {"max_error", total.max_error}};
  std::cout << j.dump(2) << "\n";
  return total.fraction() >= required ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-guided video object removal"};
  app.require_subcommand(1);

  const int default_threads =
      static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  InpaintArgs in;
  std::string config_path;
  in.options.threads = default_threads;
  auto* inpaint = app.add_subcommand("inpaint", "Remove masked objects from a frame sequence");
  inpaint->add_option("--config", config_path,
                      "Flat key = value file with the option names below; flags win");
  std::map<std::string, CLI::Option*> keyed;
  keyed["frames"] = inpaint->add_option("--frames", in.frames, "Frame directory (#####.png)");
  keyed["masks"] = inpaint->add_option("--masks", in.masks,
                                       "Mask directory (same names; _pos suffix for positive)");
  keyed["flows"] = inpaint->add_option("--flows", in.flows,
                                       "Flow directory (fwd_#####.flo, bwd_#####.flo)");
  keyed["out"] = inpaint->add_option("--out", in.out, "Output directory");
  keyed["references"] = inpaint->add_option(
      "--references", in.references,
      "Reference directory for reference_mode=file (default <out>/references)");
  keyed["report"] =
      inpaint->add_option("--report", in.report, "Report path (default <out>/report.json)");
  keyed["provenance"] =
      inpaint->add_option("--provenance", in.provenance, "Write per-pixel provenance CSV");
  keyed["estimate"] =
      inpaint->add_option("--estimate", in.estimate, "Flow source; only 'external' is supported");
  keyed["dilate_radius"] =
      inpaint->add_option("--dilate_radius", in.options.dilate_radius, "Mask dilation radius")
          ->check(CLI::NonNegativeNumber);
  keyed["verify_threshold"] =
      inpaint->add_option("--verify_threshold", in.options.verify_threshold,
                          "L1 color agreement threshold")
          ->check(CLI::NonNegativeNumber);
  keyed["max_key_rounds"] =
      inpaint->add_option("--max_key_rounds", in.options.max_key_rounds, "Key frame rounds")
          ->check(CLI::PositiveNumber);
  keyed["reference_mode"] =
      inpaint->add_option("--reference_mode", in.reference_mode, "file, fallback or off")
          ->check(CLI::IsMember({"file", "fallback", "off"}));
  keyed["positive_masks"] = inpaint->add_option(
      "--positive_masks", in.options.positive_masks,
      "Preserve occluders given by _pos masks (on/off)");
  keyed["threads"] = inpaint->add_option("--threads", in.options.threads, "Worker threads")
                         ->envname("FLOWPULL_THREADS")
                         ->check(CLI::PositiveNumber);

  std::string suite_path, bench_json;
  int bench_threads = default_threads;
  auto* bench = app.add_subcommand("bench", "Run the propagation strategy benchmark");
  bench->add_option("--suite", suite_path, "Suite config file")->required();
  bench->add_option("--json", bench_json, "Also write the rows as JSON");
  auto* bench_threads_opt = bench->add_option("--threads", bench_threads, "Worker threads")
                                ->envname("FLOWPULL_THREADS")
                                ->check(CLI::PositiveNumber);

  std::string scene_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic fixture");
  synth->add_option("--scene", scene_path, "Scene config file")->required();
  synth->add_option("--out", synth_out, "Output root (frames/ masks/ flows/ gt/)")->required();

  std::string check_flows;
  int check_w = 64, check_h = 64, check_l = 12;
  std::uint64_t check_seed = 1;
  double check_tol = 1e-3, check_required = 0.999;
  auto* flowcheck =
      app.add_subcommand("flowcheck", "Compare chained maps with per-pixel tracing");
  flowcheck->add_option("--flows", check_flows, "Flow directory; random flows when omitted");
  flowcheck->add_option("--width", check_w)->check(CLI::PositiveNumber);
  flowcheck->add_option("--height", check_h)->check(CLI::PositiveNumber);
  flowcheck->add_option("--length", check_l)->check(CLI::Range(2, 1000));
  flowcheck->add_option("--seed", check_seed);
  flowcheck->add_option("--tolerance", check_tol, "Pixels");
  flowcheck->add_option("--required", check_required, "Minimum agreeing fraction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inpaint) {
      if (!config_path.empty()) {
        const KeyValueConfig config = KeyValueConfig::load(config_path);
        for (const auto& [key, value] : config.entries()) {
          auto it = keyed.find(key);
          if (it == keyed.end()) throw Error(config_path + ": unknown key '" + key + "'");
          if (it->second->count() > 0) continue;
          try {
            it->second->add_result(value);
            it->second->run_callback();
          } catch (const CLI::Error& e) {
            throw Error(config_path + ": " + key + ": " + e.what());
          }
        }
      }
      for (const char* key : {"frames", "masks", "flows", "out"}) {
        if (keyed[key]->count() == 0) throw Error(std::string("--") + key + " is required");
      }
      return run_inpaint(in);
    }
    if (*bench) return run_bench(suite_path, bench_json, bench_threads, bench_threads_opt->count() > 0);
    if (*synth) return run_synth(scene_path, synth_out);
    if (*flowcheck) {
      return run_flowcheck(check_flows, check_w, check_h, check_l, check_seed, check_tol,
                           check_required);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
