#include "flowpull/pipeline.hpp"

#include <chrono>
#include <utility>

#include "flowpull/flow_complete.hpp"
#include "flowpull/media_io.hpp"
#include "flowpull/occlusion.hpp"
#include "flowpull/parallel.hpp"
#include "flowpull/synthbench.hpp"
#include "json.hpp"

namespace flowpull {

const char* to_string(ReferenceMode mode) {
  switch (mode) {
    case ReferenceMode::kFile:
      return "file";
    case ReferenceMode::kFallback:
      return "fallback";
    case ReferenceMode::kOff:
      return "off";
  }
  return "unknown";
}

const char* to_string(PropagationMode mode) {
  switch (mode) {
    case PropagationMode::kOneShot:
      return "oneshot";
    case PropagationMode::kRecurrent:
      return "recurrent";
    case PropagationMode::kNone:
      return "none";
  }
  return "unknown";
}

ReferenceMode parse_reference_mode(const std::string& text) {
  if (text == "file") return ReferenceMode::kFile;
  if (text == "fallback") return ReferenceMode::kFallback;
  if (text == "off") return ReferenceMode::kOff;
  throw Error("unknown reference_mode '" + text + "' (expected file, fallback or off)");
}

void RunReport::add_stage(const std::string& name, bool ran, double seconds) {
  stages.push_back({name, ran, seconds});
}

std::string RunReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["frames"] = frames;
  j["width"] = width;
  j["height"] = height;
  j["options"] = {{"dilate_radius", options.dilate_radius},
                  {"verify_threshold", options.verify_threshold},
                  {"max_key_rounds", options.max_key_rounds},
                  {"reference_mode", to_string(options.reference_mode)},
                  {"positive_masks", options.positive_masks},
                  {"propagation", to_string(options.propagation)}};
  ordered_json stage_list = ordered_json::array();
  for (const StageRecord& s : stages) {
    stage_list.push_back({{"name", s.name}, {"status", s.ran ? "run" : "skipped"}});
  }
  j["stages"] = stage_list;

  ordered_json rounds = ordered_json::array();
  for (const KeyRound& r : key_rounds) {
    rounds.push_back({{"key_frame", r.key},
                      {"connection_count", r.connection_count},
                      {"ingested", r.ingested},
                      {"propagated", r.propagated},
                      {"residual", r.residual}});
  }
  ordered_json keys = ordered_json::array();
  for (const KeyRound& r : key_rounds) keys.push_back(r.key);
  j["reference"] = {{"status", reference_status},
                    {"key_frames", keys},
                    {"rounds", rounds},
                    {"requested_key_frame",
                     requested_key ? ordered_json(*requested_key) : ordered_json(nullptr)}};
  j["fallbacks"] = {{"flow_forward", flow_fallback_forward},
                    {"flow_backward", flow_fallback_backward},
                    {"frame_completion", frame_fallbacks}};

  ordered_json frames_json = ordered_json::array();
  FrameStats total;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    const FrameStats& f = per_frame[i];
    frames_json.push_back({{"frame", i},
                           {"hole", f.hole},
                           {"filled", f.filled},
                           {"invalid", f.invalid},
                           {"residual_after_propagation", f.residual_after_propagation},
                           {"reference_filled", f.reference_filled},
                           {"completed", f.completed}});
    total.hole += f.hole;
    total.filled += f.filled;
    total.invalid += f.invalid;
    total.residual_after_propagation += f.residual_after_propagation;
    total.reference_filled += f.reference_filled;
    total.completed += f.completed;
  }
  j["per_frame"] = frames_json;
  j["totals"] = {{"hole", total.hole},
                 {"filled", total.filled},
                 {"invalid", total.invalid},
                 {"residual_after_propagation", total.residual_after_propagation},
                 {"reference_filled", total.reference_filled},
                 {"completed", total.completed}};
  return j.dump(2) + "\n";
}

std::string RunReport::timings_json() const {
  nlohmann::ordered_json stage_list = nlohmann::ordered_json::array();
  double total = 0.0;
  for (const StageRecord& s : stages) {
    stage_list.push_back({{"name", s.name}, {"seconds", s.seconds}});
    total += s.seconds;
  }
  nlohmann::ordered_json j;
  j["stages"] = stage_list;
  j["total_seconds"] = total;
  return j.dump(2) + "\n";
}

namespace {

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

PropagationState holes_only(const Sequence& seq) {
  PropagationState state;
  for (int i = 0; i < seq.length(); ++i) {
    Image image = seq.frames[i];
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
      if (seq.masks[i].data()[p]) std::fill_n(image.pixel(p), 3, 0.0f);
    }
    state.images.push_back(std::move(image));
    state.masks.push_back(seq.masks[i]);
    state.invalid.emplace_back(seq.width(), seq.height(), 0);
  }
  return state;
}

}  // namespace

PipelineResult run_pipeline(Sequence seq, const PipelineOptions& options,
                            ReferenceProvider* provider, const FrameCompleter* completer) {
  const HarmonicCompleter default_completer;
  if (!completer) completer = &default_completer;
  if (options.threads < 1) throw Error("threads must be at least 1");
  if (options.dilate_radius < 0) throw Error("dilate_radius must be non-negative");
  if (!(options.verify_threshold >= 0.0)) throw Error("verify_threshold must be non-negative");
  if (options.max_key_rounds < 1) throw Error("max_key_rounds must be at least 1");

  PipelineResult result;
  RunReport& report = result.report;
  report.options = options;

  {
    StageTimer t;
    validate_sequence(seq);
    report.add_stage("validate", true, t.seconds());
  }
  const int length = seq.length();
  const int threads = options.threads;
  report.frames = length;
  report.width = seq.width();
  report.height = seq.height();

  {
    StageTimer t;
    const bool run = options.dilate_radius > 0;
    if (run) {
      parallel_for(length, threads,
                   [&](int i) { seq.masks[i] = dilate_mask(seq.masks[i], options.dilate_radius); });
    }
    report.add_stage("dilate_masks", run, t.seconds());
  }
  {
    StageTimer t;
    const bool run = options.positive_masks && !seq.positive_masks.empty();
    if (run) {
      parallel_for(length, threads,
                   [&](int i) { seq.masks[i] = merge_masks(seq.masks[i], seq.positive_masks[i]); });
    }
    report.add_stage("merge_positive_masks", run, t.seconds());
  }

  report.per_frame.resize(length);
  for (int i = 0; i < length; ++i) report.per_frame[i].hole = count_set(seq.masks[i]);
  const bool multi_frame = length > 1;

  {
    StageTimer t;
    if (multi_frame) {
      const FlowSetCompletion fc = complete_flows(seq.flows, seq.masks, threads);
      report.flow_fallback_forward = fc.forward_fallbacks;
      report.flow_fallback_backward = fc.backward_fallbacks;
    }
    report.add_stage("complete_flows", multi_frame, t.seconds());
  }

  PropagationState state;
  {
    StageTimer t;
    const bool run = multi_frame && options.propagation != PropagationMode::kNone;
    if (!run) {
      state = holes_only(seq);
    } else if (options.propagation == PropagationMode::kOneShot) {
      CollectOptions co;
      co.verify_threshold = options.verify_threshold;
      co.threads = threads;
      co.record_provenance = options.record_provenance;
      CollectResult collected = collect_bidirectional(seq, seq.flows, co);
      state = std::move(collected.state);
      result.provenance = std::move(collected.provenance);
    } else {
      state = recurrent_warp_baseline(seq, seq.flows, options.verify_threshold);
    }
    report.add_stage("collect_bidirectional", run, t.seconds());
  }
  for (int i = 0; i < length; ++i) {
    FrameStats& f = report.per_frame[i];
    f.invalid = count_set(state.invalid[i]);
    f.residual_after_propagation = count_set(state.masks[i]);
    f.filled = f.hole - f.invalid - f.residual_after_propagation;
  }

  {
    StageTimer t;
    std::size_t residual = 0;
    for (const Mask& m : state.masks) residual += count_set(m);
    const bool run = multi_frame && options.reference_mode != ReferenceMode::kOff && residual > 0;
    if (run) {
      FallbackReferenceProvider fallback(*completer);
      ReferenceProvider& source = provider ? *provider : fallback;
      if (options.propagation == PropagationMode::kRecurrent) {
        // Recurrent strategy: one reference at the first frame, carried outward.
        std::vector<Mask> before = state.masks;
        std::optional<Image> reference;
        try {
          reference = source.reference_for(0, state);
        } catch (const std::exception&) {
          reference.reset();
        }
        if (reference) {
          KeyRound info;
          info.key = 0;
          info.ingested = count_set(state.masks[0]);
          state = recurrent_reference_propagation(std::move(state), seq.flows, 0, *reference);
          for (int i = 0; i < length; ++i) {
            const std::size_t gained = count_set(before[i]) - count_set(state.masks[i]);
            report.per_frame[i].reference_filled = gained;
            if (i != 0) info.propagated += gained;
            info.residual += count_set(state.masks[i]);
          }
          report.key_rounds.push_back(info);
          report.reference_status = info.residual == 0 ? "complete" : "round_limit";
        } else {
          report.reference_status = to_string(KeyLoopStatus::kProviderFailed);
          report.requested_key = 0;
        }
      } else {
        KeyLoopResult loop =
            multi_key_loop(std::move(state), seq.flows, source, options.max_key_rounds, threads);
        state = std::move(loop.state);
        report.key_rounds = loop.rounds;
        report.reference_status = to_string(loop.status);
        report.requested_key = loop.failed_key;
        for (int i = 0; i < length; ++i) {
          report.per_frame[i].reference_filled = count_set(loop.reference_sourced[i]);
        }
      }
    } else if (!multi_frame || options.reference_mode == ReferenceMode::kOff) {
      report.reference_status = residual > 0 ? "off" : "not_needed";
    }
    report.add_stage("reference", run, t.seconds());
  }

  {
    StageTimer t;
    std::vector<char> fallback_used(length, 0);
    parallel_for(length, threads, [&](int i) {
      CompletionInput in =
          assemble_completion_input(state.images[i], state.masks[i], state.invalid[i]);
      report.per_frame[i].completed = count_set(in.hole);
      if (count_set(in.hole) == 0) return;
      FrameCompletion done = completer->complete(in.image, in.hole);
      fallback_used[i] = done.used_fallback;
      state.images[i] = std::move(done.image);
    });
    for (int i = 0; i < length; ++i) {
      if (fallback_used[i]) report.frame_fallbacks.push_back(i);
    }
    report.add_stage("complete_frames", true, t.seconds());
  }

  {
    StageTimer t;
    const bool run = options.positive_masks && !seq.positive_masks.empty();
    if (run) {
      parallel_for(length, threads, [&](int i) {
        state.images[i] = overlay_positive(state.images[i], seq.frames[i], seq.positive_masks[i]);
      });
    }
    report.add_stage("overlay_positive", run, t.seconds());
  }

  result.frames = std::move(state.images);
  return result;
}

}  // namespace flowpull
