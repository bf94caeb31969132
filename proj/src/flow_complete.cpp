#include "flowpull/flow_complete.hpp"

#include "flowpull/parallel.hpp"

namespace flowpull {

FlowCompletion complete_flow(const FlowField& flow, const Mask& mask,
                             const HarmonicOptions& options) {
  if (!flow.vectors.same_shape(mask)) throw Error("complete_flow: resolution mismatch");
  FlowCompletion out;
  out.flow = FlowField(flow.width(), flow.height());
  Mask hole(flow.width(), flow.height(), 0);
  for (std::size_t p = 0; p < flow.vectors.pixel_count(); ++p) {
    if (mask.data()[p] || !flow.valid.data()[p]) {
      hole.data()[p] = 1;
    } else {
      out.flow.vectors.pixel(p)[0] = flow.vectors.pixel(p)[0];
      out.flow.vectors.pixel(p)[1] = flow.vectors.pixel(p)[1];
    }
  }
  out.stats = harmonic_fill<2>(out.flow.vectors, hole, {0.0f, 0.0f}, options);
  out.used_fallback = out.stats.unbounded_components > 0;
  return out;
}

FlowSetCompletion complete_flows(FlowSet& flows, std::span<const Mask> masks,
                                 int threads) {
  const int pairs = static_cast<int>(flows.forward.size());
  if (flows.backward.size() != flows.forward.size() ||
      masks.size() != static_cast<std::size_t>(pairs + 1)) {
    throw Error("complete_flows: flow and mask counts disagree");
  }
  std::vector<char> fallback(2 * pairs, 0);
  parallel_for(2 * pairs, threads, [&](int item) {
    const int pair = item / 2;
    const bool forward = item % 2 == 0;
    FlowField& target = forward ? flows.forward[pair] : flows.backward[pair];
    const Mask& mask = forward ? masks[pair] : masks[pair + 1];
    FlowCompletion done = complete_flow(target, mask);
    fallback[item] = done.used_fallback;
    target = std::move(done.flow);
  });
  FlowSetCompletion report;
  for (int pair = 0; pair < pairs; ++pair) {
    if (fallback[2 * pair]) report.forward_fallbacks.push_back(pair);
    if (fallback[2 * pair + 1]) report.backward_fallbacks.push_back(pair);
  }
  return report;
}

}  // namespace flowpull
