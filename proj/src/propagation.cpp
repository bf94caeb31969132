#include "flowpull/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "flowpull/parallel.hpp"

namespace flowpull {

CorrespondenceMap identity_map(int frame, int width, int height) {
  return CorrespondenceMap{frame, frame, FlowField(width, height)};
}

const FlowField& adjacent_flow(const FlowSet& flows, int from, int to) {
  if (to == from + 1) return flows.forward.at(from);
  if (to == from - 1) return flows.backward.at(to);
  throw Error("adjacent_flow: frames " + std::to_string(from) + " and " +
              std::to_string(to) + " are not adjacent");
}

CorrespondenceMap chain_step(const CorrespondenceMap& acc, const FlowSet& flows, int to) {
  const bool away = (acc.source == acc.target) ||
                    (acc.source > acc.target ? to > acc.source : to < acc.source);
  if (std::abs(to - acc.source) != 1 || !away) {
    throw Error("chain_step: frame " + std::to_string(to) +
                " does not extend the chain " + std::to_string(acc.target) + "->" +
                std::to_string(acc.source));
  }
  const FlowField& adjacent = adjacent_flow(flows, acc.source, to);
  if (!adjacent.vectors.same_shape(acc.flow.vectors)) {
    throw Error("chain_step: resolution mismatch");
  }
  const FlowField warped = grid_warp(adjacent, acc.flow);
  CorrespondenceMap out{acc.target, to, FlowField(acc.flow.width(), acc.flow.height())};
  for (std::size_t p = 0; p < out.flow.vectors.pixel_count(); ++p) {
    const bool ok = acc.flow.valid.data()[p] && warped.valid.data()[p];
    out.flow.valid.data()[p] = ok ? 1 : 0;
    if (!ok) continue;
    float* o = out.flow.vectors.pixel(p);
    const float* a = acc.flow.vectors.pixel(p);
    const float* w = warped.vectors.pixel(p);
    o[0] = a[0] + w[0];
    o[1] = a[1] + w[1];
  }
  return out;
}

CorrespondenceMap chain_to(const FlowSet& flows, int target, int source) {
  if (flows.forward.empty()) throw Error("chain_to: empty flow set");
  const FlowField& any = flows.forward.front();
  CorrespondenceMap map = identity_map(target, any.width(), any.height());
  const int step = source > target ? 1 : -1;
  for (int j = target + step; j != source + step; j += step) {
    map = chain_step(map, flows, j);
  }
  return map;
}

VerifyResult verify_pair(const std::optional<Color>& forward,
                         const std::optional<Color>& backward, double threshold) {
  if (forward && backward) {
    double distance = 0.0;
    for (int c = 0; c < 3; ++c) {
      distance += std::abs(static_cast<double>((*forward)[c]) - (*backward)[c]);
    }
    if (distance > threshold) return {std::nullopt, true};
    Color mean;
    for (int c = 0; c < 3; ++c) mean[c] = 0.5f * ((*forward)[c] + (*backward)[c]);
    return {mean, false};
  }
  if (forward) return {forward, false};
  if (backward) return {backward, false};
  return {};
}

namespace {

struct Hit {
  bool found = false;
  int source = 0;
  double x = 0.0;
  double y = 0.0;
  Color color{};
};

struct ActivePixel {
  int slot;  // index into the target's hole pixel list
  float dx;
  float dy;
};

// One directional pass for a target frame. hits[k] receives the nearest
// valid pull for holes[k].
std::vector<Hit> run_pass(const Sequence& seq, const FlowSet& flows, int target,
                          Direction direction, const std::vector<int>& holes) {
  const int width = seq.width();
  std::vector<Hit> hits(holes.size());
  std::vector<ActivePixel> active;
  active.reserve(holes.size());
  for (int k = 0; k < static_cast<int>(holes.size()); ++k) active.push_back({k, 0.0f, 0.0f});

  const int step = direction == Direction::kForward ? 1 : -1;
  for (int j = target + step; j >= 0 && j < seq.length() && !active.empty(); j += step) {
    const FlowField& adjacent = adjacent_flow(flows, j - step, j);
    const Image& source = seq.frames[j];
    const Mask& source_mask = seq.masks[j];
    std::size_t keep = 0;
    for (ActivePixel a : active) {
      const int p = holes[a.slot];
      const int x = p % width;
      const int y = p / width;
      if (!advance_chain(adjacent, x, y, a.dx, a.dy)) continue;
      const double sx = x + static_cast<double>(a.dx);
      const double sy = y + static_cast<double>(a.dy);
      const auto s = bilinear_sample(source, &source_mask, sx, sy);
      if (s.valid) {
        hits[a.slot] = Hit{true, j, sx, sy, s.value};
        continue;
      }
      active[keep++] = a;
    }
    active.resize(keep);
  }
  return hits;
}

}  // namespace

CollectResult collect_bidirectional(const Sequence& seq, const FlowSet& completed,
                                    const CollectOptions& options) {
  const int length = seq.length();
  if (completed.forward.size() != static_cast<std::size_t>(std::max(length - 1, 0)) ||
      completed.backward.size() != completed.forward.size()) {
    throw Error("collect_bidirectional: flow count does not match sequence length");
  }
  const int width = seq.width();
  const int height = seq.height();

  CollectResult result;
  PropagationState& state = result.state;
  state.images.resize(length);
  state.masks.resize(length);
  state.invalid.resize(length);
  std::vector<std::vector<ProvenanceRecord>> provenance(length);

  parallel_for(length, options.threads, [&](int i) {
    const Mask& hole = seq.masks[i];
    Image image = seq.frames[i];
    Mask remaining(width, height, 0);
    Mask invalid(width, height, 0);
    std::vector<int> holes;
    for (int p = 0; p < static_cast<int>(hole.pixel_count()); ++p) {
      if (!hole.data()[p]) continue;
      holes.push_back(p);
      float* c = image.pixel(p);
      c[0] = c[1] = c[2] = 0.0f;
    }

    const auto forward = run_pass(seq, completed, i, Direction::kForward, holes);
    const auto backward = run_pass(seq, completed, i, Direction::kBackward, holes);

    for (std::size_t k = 0; k < holes.size(); ++k) {
      const int p = holes[k];
      std::optional<Color> cf, cb;
      if (forward[k].found) cf = forward[k].color;
      if (backward[k].found) cb = backward[k].color;
      const VerifyResult v = verify_pair(cf, cb, options.verify_threshold);
      if (v.invalid) {
        invalid.data()[p] = 1;
      } else if (v.color) {
        float* c = image.pixel(p);
        for (int ch = 0; ch < 3; ++ch) c[ch] = (*v.color)[ch];
        if (options.record_provenance) {
          for (const auto* hit : {&forward[k], &backward[k]}) {
            if (!hit->found) continue;
            provenance[i].push_back(ProvenanceRecord{
                i, p % width, p / width,
                hit == &forward[k] ? Direction::kForward : Direction::kBackward,
                hit->source, hit->x, hit->y, hit->color});
          }
        }
      } else {
        remaining.data()[p] = 1;
      }
    }
    state.images[i] = std::move(image);
    state.masks[i] = std::move(remaining);
    state.invalid[i] = std::move(invalid);
  });

  for (auto& records : provenance) {
    result.provenance.insert(result.provenance.end(), records.begin(), records.end());
  }
  return result;
}

void write_provenance(const std::vector<ProvenanceRecord>& records,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write provenance file " + path.string());
  out << "target,x,y,direction,source,source_x,source_y,r,g,b\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%d,%d,%s,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.target, r.x, r.y,
                  r.direction == Direction::kForward ? "forward" : "backward", r.source,
                  r.source_x, r.source_y, r.color[0], r.color[1], r.color[2]);
    out << line;
  }
  if (!out) throw Error("failed writing provenance file " + path.string());
}

}  // namespace flowpull
