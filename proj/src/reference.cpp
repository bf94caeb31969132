#include "flowpull/reference.hpp"

#include <numeric>

#include "flowpull/media_io.hpp"
#include "flowpull/parallel.hpp"
#include "flowpull/propagation.hpp"

namespace flowpull {

namespace {

std::vector<int> set_pixels(const Mask& mask) {
  std::vector<int> out;
  for (int p = 0; p < static_cast<int>(mask.pixel_count()); ++p) {
    if (mask.data()[p]) out.push_back(p);
  }
  return out;
}

struct ChainedPixel {
  int pixel;
  float dx;
  float dy;
};

}  // namespace

double connection_count(const PropagationState& state, const FlowSet& flows, int frame) {
  const int length = state.length();
  const Mask& own = state.masks.at(frame);
  const int width = own.width();
  const std::vector<int> pixels = set_pixels(own);
  if (pixels.empty()) return 0.0;

  // j = frame: identity chain, every residual pixel matches itself.
  double total = static_cast<double>(pixels.size());
  for (int step : {1, -1}) {
    std::vector<ChainedPixel> active;
    active.reserve(pixels.size());
    for (int p : pixels) active.push_back({p, 0.0f, 0.0f});
    for (int j = frame + step; j >= 0 && j < length && !active.empty(); j += step) {
      const FlowField& adjacent = adjacent_flow(flows, j - step, j);
      const Mask& other = state.masks[j];
      std::size_t keep = 0;
      double partial = 0.0;
      for (ChainedPixel a : active) {
        const int x = a.pixel % width;
        const int y = a.pixel / width;
        if (!advance_chain(adjacent, x, y, a.dx, a.dy)) continue;
        const auto s = bilinear_sample(other, nullptr, x + static_cast<double>(a.dx),
                                       y + static_cast<double>(a.dy));
        if (s.valid) partial += s.value[0];
        active[keep++] = a;
      }
      active.resize(keep);
      total += partial;
    }
  }
  return total;
}

std::vector<double> connection_counts(const PropagationState& state, const FlowSet& flows,
                                      int threads) {
  std::vector<double> counts(state.length(), 0.0);
  parallel_for(state.length(), threads,
               [&](int i) { counts[i] = connection_count(state, flows, i); });
  return counts;
}

std::optional<int> argmax_lowest(std::span<const double> counts) {
  if (counts.empty()) return std::nullopt;
  int best = 0;
  for (int i = 1; i < static_cast<int>(counts.size()); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

std::optional<int> select_key_frame(const PropagationState& state, const FlowSet& flows,
                                    int threads) {
  bool any = false;
  for (const Mask& m : state.masks) any = any || count_set(m) > 0;
  if (!any) return std::nullopt;
  const auto counts = connection_counts(state, flows, threads);
  return argmax_lowest(counts);
}

Mask ingest_reference(PropagationState& state, int key, const Image& reference) {
  Image& image = state.images.at(key);
  Mask& hole = state.masks.at(key);
  if (!reference.same_shape(image)) {
    throw Error("reference image resolution " + std::to_string(reference.width()) + "x" +
                std::to_string(reference.height()) + " does not match frame " +
                std::to_string(key));
  }
  Mask marked(image.width(), image.height(), 0);
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    if (!hole.data()[p]) continue;
    float* c = image.pixel(p);
    const float* r = reference.pixel(p);
    c[0] = r[0];
    c[1] = r[1];
    c[2] = r[2];
    hole.data()[p] = 0;
    marked.data()[p] = 1;
  }
  return marked;
}

PropagatedReference propagate_reference(const PropagationState& state, const FlowSet& flows,
                                        int key, int threads) {
  const int length = state.length();
  PropagatedReference out{state.images, state.masks, {}};
  out.filled.resize(length);
  const Image& key_image = state.images.at(key);
  const Mask key_missing = mask_union(state.masks[key], state.invalid[key]);
  const int width = key_image.width();

  parallel_for(length, threads, [&](int i) {
    out.filled[i] = Mask(width, key_image.height(), 0);
    if (i == key) return;
    const std::vector<int> pixels = set_pixels(state.masks[i]);
    if (pixels.empty()) return;
    std::vector<ChainedPixel> active;
    active.reserve(pixels.size());
    for (int p : pixels) active.push_back({p, 0.0f, 0.0f});
    const int step = key > i ? 1 : -1;
    for (int j = i + step; j != key + step && !active.empty(); j += step) {
      const FlowField& adjacent = adjacent_flow(flows, j - step, j);
      std::size_t keep = 0;
      for (ChainedPixel a : active) {
        if (advance_chain(adjacent, a.pixel % width, a.pixel / width, a.dx, a.dy)) {
          active[keep++] = a;
        }
      }
      active.resize(keep);
    }
    Image& image = out.images[i];
    Mask& remaining = out.masks[i];
    for (const ChainedPixel& a : active) {
      const auto s =
          bilinear_sample(key_image, &key_missing, a.pixel % width + static_cast<double>(a.dx),
                          a.pixel / width + static_cast<double>(a.dy));
      if (!s.valid) continue;
      float* c = image.pixel(a.pixel);
      for (int ch = 0; ch < 3; ++ch) c[ch] = c[ch] + s.value[ch];
      remaining.data()[a.pixel] = 0;
      out.filled[i].data()[a.pixel] = 1;
    }
  });
  return out;
}

std::filesystem::path FileReferenceProvider::path_for(int key) const {
  return directory_ / (frame_names_.at(key) + ".png");
}

std::optional<Image> FileReferenceProvider::reference_for(int key, const PropagationState&) {
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_frame(path);
}

std::optional<Image> FallbackReferenceProvider::reference_for(int key,
                                                              const PropagationState& state) {
  const CompletionInput in =
      assemble_completion_input(state.images.at(key), state.masks.at(key), state.invalid.at(key));
  return completer_.complete(in.image, in.hole).image;
}

std::optional<Image> ImageListReferenceProvider::reference_for(int key,
                                                               const PropagationState&) {
  if (key < 0 || key >= static_cast<int>(images_.size())) return std::nullopt;
  return images_[key];
}

KeyLoopResult multi_key_loop(PropagationState state, const FlowSet& flows,
                             ReferenceProvider& provider, int max_rounds, int threads) {
  if (max_rounds < 1) throw Error("max_key_rounds must be at least 1");
  KeyLoopResult result;
  const int length = state.length();
  result.reference_sourced.reserve(length);
  for (int i = 0; i < length; ++i) {
    result.reference_sourced.emplace_back(state.masks[i].width(), state.masks[i].height(), 0);
  }
  auto residual = [&state] {
    std::size_t n = 0;
    for (const Mask& m : state.masks) n += count_set(m);
    return n;
  };

  result.status = KeyLoopStatus::kRoundLimit;
  for (int round = 0; round < max_rounds; ++round) {
    if (residual() == 0) {
      result.status = KeyLoopStatus::kComplete;
      break;
    }
    const auto counts = connection_counts(state, flows, threads);
    const int key = *argmax_lowest(counts);

    std::optional<Image> reference;
    try {
      reference = provider.reference_for(key, state);
    } catch (const std::exception&) {
      reference.reset();
    }
    if (!reference) {
      result.status = KeyLoopStatus::kProviderFailed;
      result.failed_key = key;
      break;
    }

    KeyRound info;
    info.key = key;
    info.connection_count = counts[key];
    const Mask marked = ingest_reference(state, key, *reference);
    info.ingested = count_set(marked);
    PropagatedReference pushed = propagate_reference(state, flows, key, threads);
    state.images = std::move(pushed.images);
    state.masks = std::move(pushed.masks);
    for (int i = 0; i < length; ++i) {
      const Mask& src = i == key ? marked : pushed.filled[i];
      for (std::size_t p = 0; p < src.pixel_count(); ++p) {
        if (src.data()[p]) result.reference_sourced[i].data()[p] = 1;
      }
      if (i != key) info.propagated += count_set(pushed.filled[i]);
    }
    info.residual = residual();
    result.rounds.push_back(info);
  }
  if (result.status == KeyLoopStatus::kRoundLimit && residual() == 0) {
    result.status = KeyLoopStatus::kComplete;
  }
  result.state = std::move(state);
  return result;
}

const char* to_string(KeyLoopStatus status) {
  switch (status) {
    case KeyLoopStatus::kComplete:
      return "complete";
    case KeyLoopStatus::kRoundLimit:
      return "round_limit";
    case KeyLoopStatus::kProviderFailed:
      return "reference_unavailable";
  }
  return "unknown";
}

}  // namespace flowpull
