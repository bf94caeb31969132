#include "flowpull/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "flowpull/propagation.hpp"
#include "flowpull/warp.hpp"

namespace flowpull {

Affine2 Affine2::inverse() const {
  const double det = determinant();
  if (std::abs(det) < 1e-12) throw Error("degenerate transform");
  Affine2 inv;
  inv.a = d / det;
  inv.b = -b / det;
  inv.c = -c / det;
  inv.d = a / det;
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  return inv;
}

Affine2 Affine2::after(const Affine2& o) const {
  Affine2 r;
  r.a = a * o.a + b * o.c;
  r.b = a * o.b + b * o.d;
  r.c = c * o.a + d * o.c;
  r.d = c * o.b + d * o.d;
  r.tx = a * o.tx + b * o.ty + tx;
  r.ty = c * o.tx + d * o.ty + ty;
  return r;
}

Affine2 Affine2::about(double cx, double cy, double zoom, double rotation_deg, double x,
                       double y) {
  const double t = rotation_deg * std::numbers::pi / 180.0;
  Affine2 m;
  m.a = zoom * std::cos(t);
  m.b = -zoom * std::sin(t);
  m.c = zoom * std::sin(t);
  m.d = zoom * std::cos(t);
  m.tx = cx - (m.a * cx + m.b * cy) + x;
  m.ty = cy - (m.c * cx + m.d * cy) + y;
  return m;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// Headroom below the [0,1] bounds so float rounding never leaves the range.
constexpr double kAmplitudeBudget = 0.49;

}  // namespace

ProceduralTexture::ProceduralTexture(const TextureSpec& spec, std::uint64_t seed)
    : seed_(seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double noise_share = std::clamp(spec.noise_share, 0.0, 1.0);
  const double wave_budget = spec.sinusoids > 0 ? kAmplitudeBudget * (1.0 - noise_share) : 0.0;
  noise_amplitude_ = kAmplitudeBudget - wave_budget;
  noise_cell_ = spec.noise_cell;

  std::array<double, 3> weight_sum{};
  for (int k = 0; k < spec.sinusoids; ++k) {
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const double period = spec.min_period + (spec.max_period - spec.min_period) * unit(rng);
    Wave wave;
    wave.kx = 2.0 * std::numbers::pi * std::cos(theta) / period;
    wave.ky = 2.0 * std::numbers::pi * std::sin(theta) / period;
    wave.phase = 2.0 * std::numbers::pi * unit(rng);
    for (int c = 0; c < 3; ++c) {
      wave.amplitude[c] = 0.3 + 0.7 * unit(rng);
      weight_sum[c] += wave.amplitude[c];
    }
    waves_.push_back(wave);
  }
  for (Wave& wave : waves_) {
    for (int c = 0; c < 3; ++c) wave.amplitude[c] *= wave_budget / weight_sum[c];
  }
}

double ProceduralTexture::noise(double u, double v, int channel) const {
  const double gu = u / noise_cell_;
  const double gv = v / noise_cell_;
  const double fu = std::floor(gu);
  const double fv = std::floor(gv);
  const auto ix = static_cast<std::int64_t>(fu);
  const auto iy = static_cast<std::int64_t>(fv);
  auto lattice = [&](std::int64_t x, std::int64_t y) {
    std::uint64_t h = seed_ * 0x2545f4914f6cdd1dull;
    h = splitmix64(h ^ static_cast<std::uint64_t>(x) * 0x9e3779b97f4a7c15ull);
    h = splitmix64(h ^ static_cast<std::uint64_t>(y) * 0xc2b2ae3d27d4eb4full);
    h = splitmix64(h ^ static_cast<std::uint64_t>(channel + 1));
    return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
  };
  const double su = quintic(gu - fu);
  const double sv = quintic(gv - fv);
  const double top = lattice(ix, iy) + su * (lattice(ix + 1, iy) - lattice(ix, iy));
  const double bottom =
      lattice(ix, iy + 1) + su * (lattice(ix + 1, iy + 1) - lattice(ix, iy + 1));
  return top + sv * (bottom - top);
}

Color ProceduralTexture::at(double u, double v) const {
  Color out;
  for (int c = 0; c < 3; ++c) {
    double value = 0.5;
    for (const Wave& w : waves_) value += w.amplitude[c] * std::sin(w.kx * u + w.ky * v + w.phase);
    if (noise_amplitude_ > 0.0) value += noise_amplitude_ * noise(u, v, c);
    out[c] = static_cast<float>(value);
  }
  return out;
}

bool OccluderSpec::covers(int frame, double x, double y) const {
  const double cx = x0 + vx * frame;
  const double cy = y0 + vy * frame;
  if (shape == OccluderShape::kDisc) {
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius;
  }
  return std::abs(x - cx) <= radius && std::abs(y - cy) <= half_height;
}

Affine2 SceneSpec::step() const {
  switch (motion) {
    case MotionKind::kStatic:
      return {};
    case MotionKind::kTranslate:
      return Affine2::translation(tx, ty);
    case MotionKind::kAffine:
      return Affine2::about(0.5 * (width - 1), 0.5 * (height - 1), zoom, rotation_deg, tx, ty);
  }
  return {};
}

namespace {

OccluderSpec occluder_from_config(const KeyValueConfig& cfg, const std::string& prefix,
                                  const OccluderSpec& defaults) {
  OccluderSpec o = defaults;
  const std::string shape = cfg.get(prefix + "shape", "disc");
  if (shape == "disc") {
    o.shape = OccluderShape::kDisc;
  } else if (shape == "rect") {
    o.shape = OccluderShape::kRect;
  } else {
    throw Error(cfg.name() + ": unknown " + prefix + "shape '" + shape + "'");
  }
  o.x0 = cfg.get_double(prefix + "x", o.x0);
  o.y0 = cfg.get_double(prefix + "y", o.y0);
  o.vx = cfg.get_double(prefix + "vx", o.vx);
  o.vy = cfg.get_double(prefix + "vy", o.vy);
  o.radius = cfg.get_double(prefix + "radius", o.radius);
  o.half_height = cfg.get_double(prefix + "half_height", o.radius);
  return o;
}

}  // namespace

SceneSpec scene_from_config(const KeyValueConfig& cfg) {
  cfg.require_known({"name", "width", "height", "length", "seed", "motion", "tx", "ty", "zoom",
                     "rotation_deg", "texture_sinusoids", "texture_min_period",
                     "texture_max_period", "texture_noise_share", "texture_noise_cell",
                     "occluder_shape", "occluder_x", "occluder_y", "occluder_vx",
                     "occluder_vy", "occluder_radius", "occluder_half_height", "positive",
                     "positive_shape", "positive_x", "positive_y", "positive_vx",
                     "positive_vy", "positive_radius", "positive_half_height"});
  SceneSpec s;
  s.name = cfg.get("name", s.name);
  s.width = cfg.get_int("width", s.width);
  s.height = cfg.get_int("height", s.height);
  s.length = cfg.get_int("length", s.length);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<int>(s.seed)));
  const std::string motion = cfg.get("motion", "static");
  if (motion == "static") {
    s.motion = MotionKind::kStatic;
  } else if (motion == "translate") {
    s.motion = MotionKind::kTranslate;
  } else if (motion == "affine") {
    s.motion = MotionKind::kAffine;
  } else {
    throw Error(cfg.name() + ": unknown motion '" + motion + "'");
  }
  s.tx = cfg.get_double("tx", s.tx);
  s.ty = cfg.get_double("ty", s.ty);
  s.zoom = cfg.get_double("zoom", s.zoom);
  s.rotation_deg = cfg.get_double("rotation_deg", s.rotation_deg);
  s.texture.sinusoids = cfg.get_int("texture_sinusoids", s.texture.sinusoids);
  s.texture.min_period = cfg.get_double("texture_min_period", s.texture.min_period);
  s.texture.max_period = cfg.get_double("texture_max_period", s.texture.max_period);
  s.texture.noise_share = cfg.get_double("texture_noise_share", s.texture.noise_share);
  s.texture.noise_cell = cfg.get_double("texture_noise_cell", s.texture.noise_cell);

  OccluderSpec base;
  base.x0 = 0.5 * s.width;
  base.y0 = 0.5 * s.height;
  base.radius = 0.15 * std::min(s.width, s.height);
  s.occluder = occluder_from_config(cfg, "occluder_", base);
  if (cfg.get_bool("positive", false)) {
    OccluderSpec front = base;
    front.color = {0.1f, 0.8f, 0.2f};
    s.positive = occluder_from_config(cfg, "positive_", front);
  }
  validate_scene(s);
  return s;
}

void validate_scene(const SceneSpec& s) {
  if (s.width < 2 || s.height < 2) throw Error("scene resolution must be at least 2x2");
  if (s.length < 1) throw Error("scene length must be at least 1");
  if (s.motion == MotionKind::kAffine && !(s.zoom > 0.0)) throw Error("degenerate transform");
  if (std::abs(s.step().determinant()) < 1e-9) throw Error("degenerate transform");
  const auto check = [](const OccluderSpec& o) {
    if (!(o.radius >= 0.5) || (o.shape == OccluderShape::kRect && !(o.half_height >= 0.5))) {
      throw Error("occluder too small to be represented at this resolution");
    }
  };
  check(s.occluder);
  if (s.positive) check(*s.positive);
  const TextureSpec& t = s.texture;
  if (t.sinusoids < 0 || !(t.min_period > 0.0) || t.max_period < t.min_period ||
      !(t.noise_cell > 0.0) || t.noise_share < 0.0 || t.noise_share > 1.0) {
    throw Error("invalid texture parameters");
  }
}

Scene generate_scene(const SceneSpec& spec) {
  validate_scene(spec);
  const ProceduralTexture texture(spec.texture, spec.seed);
  const Affine2 step = spec.step();
  const Affine2 inverse_step = step.inverse();
  const int w = spec.width;
  const int h = spec.height;

  Scene scene;
  Sequence& seq = scene.sequence;
  Affine2 to_world;  // step^-i
  for (int i = 0; i < spec.length; ++i) {
    Image frame(w, h);
    Image truth(w, h);
    Mask mask(w, h, 0);
    Mask positive(w, h, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double u, v;
        to_world.apply(x, y, u, v);
        Color bg = texture.at(u, v);
        const bool front = spec.positive && spec.positive->covers(i, x, y);
        if (front) bg = spec.positive->color;
        Color shown = bg;
        if (!front && spec.occluder.covers(i, x, y)) {
          shown = spec.occluder.color;
          mask(x, y) = 1;
        }
        positive(x, y) = front ? 1 : 0;
        for (int c = 0; c < 3; ++c) {
          truth(x, y, c) = bg[c];
          frame(x, y, c) = shown[c];
        }
      }
    }
    seq.frames.push_back(std::move(frame));
    seq.masks.push_back(std::move(mask));
    if (spec.positive) seq.positive_masks.push_back(std::move(positive));
    scene.ground_truth.push_back(std::move(truth));
    to_world = to_world.after(inverse_step);
  }

  if (spec.length > 1) {
    FlowField forward(w, h);
    FlowField backward(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double fx, fy, bx, by;
        step.apply(x, y, fx, fy);
        inverse_step.apply(x, y, bx, by);
        forward.vectors(x, y, 0) = static_cast<float>(fx - x);
        forward.vectors(x, y, 1) = static_cast<float>(fy - y);
        backward.vectors(x, y, 0) = static_cast<float>(bx - x);
        backward.vectors(x, y, 1) = static_cast<float>(by - y);
      }
    }
    seq.flows.forward.assign(spec.length - 1, forward);
    seq.flows.backward.assign(spec.length - 1, backward);
  }
  return scene;
}

FlowSet random_smooth_flows(int width, int height, int length, std::uint64_t seed,
                            double amplitude) {
  std::mt19937_64 rng(splitmix64(seed ^ 0x5eedf10aull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto make = [&] {
    struct Mode {
      double amp, fx, fy, phase;
    };
    std::array<double, 2> drift{};
    std::array<std::array<Mode, 3>, 2> modes{};
    for (int c = 0; c < 2; ++c) {
      drift[c] = amplitude * (unit(rng) - 0.5);
      for (Mode& m : modes[c]) {
        m.amp = amplitude / 3.0 * unit(rng);
        m.fx = 0.5 + 1.5 * unit(rng);
        m.fy = 0.5 + 1.5 * unit(rng);
        m.phase = 2.0 * std::numbers::pi * unit(rng);
      }
    }
    FlowField flow(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        for (int c = 0; c < 2; ++c) {
          double v = drift[c];
          for (const Mode& m : modes[c]) {
            v += m.amp * std::sin(2.0 * std::numbers::pi *
                                      (m.fx * x / width + m.fy * y / height) +
                                  m.phase);
          }
          flow.vectors(x, y, c) = static_cast<float>(v);
        }
      }
    }
    return flow;
  };
  FlowSet flows;
  for (int i = 0; i + 1 < length; ++i) {
    flows.forward.push_back(make());
    flows.backward.push_back(make());
  }
  return flows;
}

TracePoint brute_force_trace(const FlowSet& flows, int from, int to, double x, double y) {
  TracePoint pos{x, y, true};
  if (from == to) return pos;
  const int step = to > from ? 1 : -1;
  for (int f = from; f != to; f += step) {
    const FlowField& flow = step > 0 ? flows.forward.at(f) : flows.backward.at(f - 1);
    const int w = flow.width();
    const int h = flow.height();
    if (pos.x < 0.0 || pos.y < 0.0 || pos.x > w - 1 || pos.y > h - 1 || std::isnan(pos.x) ||
        std::isnan(pos.y)) {
      return {pos.x, pos.y, false};
    }
    // Clamp the lower corner so the upper corner stays in range; at the last
    // row or column the upper weight is then exactly one.
    const int ix = std::min(static_cast<int>(pos.x), std::max(w - 2, 0));
    const int iy = std::min(static_cast<int>(pos.y), std::max(h - 2, 0));
    const int jx = std::min(ix + 1, w - 1);
    const int jy = std::min(iy + 1, h - 1);
    const double ax = pos.x - ix;
    const double ay = pos.y - iy;
    const double weights[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
    const int xs[4] = {ix, jx, ix, jx};
    const int ys[4] = {iy, iy, jy, jy};
    double u = 0.0;
    double v = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (weights[k] == 0.0) continue;
      if (!flow.valid(xs[k], ys[k])) return {pos.x, pos.y, false};
      u += weights[k] * flow.vectors(xs[k], ys[k], 0);
      v += weights[k] * flow.vectors(xs[k], ys[k], 1);
    }
    pos.x += u;
    pos.y += v;
  }
  return pos;
}

void OracleAgreement::merge(const OracleAgreement& other) {
  jointly_valid += other.jointly_valid;
  agreeing += other.agreeing;
  chain_only += other.chain_only;
  trace_only += other.trace_only;
  max_error = std::max(max_error, other.max_error);
}

OracleAgreement compare_with_trace(const FlowSet& flows, int from, int to, double tolerance) {
  const CorrespondenceMap map = chain_to(flows, from, to);
  OracleAgreement out;
  for (int y = 0; y < map.flow.height(); ++y) {
    for (int x = 0; x < map.flow.width(); ++x) {
      const TracePoint t = brute_force_trace(flows, from, to, x, y);
      const bool chained = map.flow.is_valid(x, y);
      if (chained != t.valid) {
        ++(chained ? out.chain_only : out.trace_only);
        continue;
      }
      if (!chained) continue;
      const double err = std::max(std::abs(x + static_cast<double>(map.flow.dx(x, y)) - t.x),
                                  std::abs(y + static_cast<double>(map.flow.dy(x, y)) - t.y));
      ++out.jointly_valid;
      if (err <= tolerance) ++out.agreeing;
      out.max_error = std::max(out.max_error, err);
    }
  }
  return out;
}

namespace {

struct Candidates {
  Image colors;
  Mask found;
};

// Fills each frame's hole from the already-filled buffer of its neighbor,
// visiting frames in `order`; `flow_of(i)` maps frame i to the buffer frame.
template <typename FlowOf>
std::vector<Candidates> recurrent_pass(const Sequence& seq, const std::vector<int>& order,
                                       FlowOf&& flow_of) {
  const int w = seq.width();
  const int h = seq.height();
  std::vector<Candidates> out(seq.length());
  Image buffer = seq.frames[order.front()];
  Mask buffer_missing = seq.masks[order.front()];
  out[order.front()] = {Image(w, h, 0.0f), Mask(w, h, 0)};
  for (std::size_t n = 1; n < order.size(); ++n) {
    const int i = order[n];
    const FlowField& flow = flow_of(i);
    Candidates cand{Image(w, h, 0.0f), Mask(w, h, 0)};
    Image next = seq.frames[i];
    Mask next_missing = seq.masks[i];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!seq.masks[i](x, y) || !flow.is_valid(x, y)) continue;
        const auto s = bilinear_sample(buffer, &buffer_missing, x + double(flow.dx(x, y)),
                                       y + double(flow.dy(x, y)));
        if (!s.valid) continue;
        for (int c = 0; c < 3; ++c) {
          cand.colors(x, y, c) = s.value[c];
          next(x, y, c) = s.value[c];
        }
        cand.found(x, y) = 1;
        next_missing(x, y) = 0;
      }
    }
    out[i] = std::move(cand);
    buffer = std::move(next);
    buffer_missing = std::move(next_missing);
  }
  return out;
}

}  // namespace

PropagationState recurrent_warp_baseline(const Sequence& seq, const FlowSet& flows,
                                         double verify_threshold) {
  const int length = seq.length();
  const int w = seq.width();
  const int h = seq.height();
  std::vector<int> descending, ascending;
  for (int i = length - 1; i >= 0; --i) descending.push_back(i);
  for (int i = 0; i < length; ++i) ascending.push_back(i);
  const auto from_later =
      recurrent_pass(seq, descending, [&](int i) -> const FlowField& { return flows.forward.at(i); });
  const auto from_earlier = recurrent_pass(
      seq, ascending, [&](int i) -> const FlowField& { return flows.backward.at(i - 1); });

  PropagationState state;
  for (int i = 0; i < length; ++i) {
    Image image = seq.frames[i];
    Mask remaining(w, h, 0);
    Mask invalid(w, h, 0);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
      if (!seq.masks[i].data()[p]) continue;
      std::optional<Color> cf, cb;
      if (from_later[i].found.data()[p]) {
        const float* c = from_later[i].colors.pixel(p);
        cf = Color{c[0], c[1], c[2]};
      }
      if (from_earlier[i].found.data()[p]) {
        const float* c = from_earlier[i].colors.pixel(p);
        cb = Color{c[0], c[1], c[2]};
      }
      const VerifyResult v = verify_pair(cf, cb, verify_threshold);
      float* out = image.pixel(p);
      if (v.color) {
        for (int c = 0; c < 3; ++c) out[c] = (*v.color)[c];
      } else {
        out[0] = out[1] = out[2] = 0.0f;
        (v.invalid ? invalid : remaining).data()[p] = 1;
      }
    }
    state.images.push_back(std::move(image));
    state.masks.push_back(std::move(remaining));
    state.invalid.push_back(std::move(invalid));
  }
  return state;
}

PropagationState recurrent_reference_propagation(PropagationState state, const FlowSet& flows,
                                                 int key, const Image& reference) {
  const int length = state.length();
  Image& key_image = state.images.at(key);
  if (!reference.same_shape(key_image)) throw Error("reference resolution mismatch");
  for (std::size_t p = 0; p < key_image.pixel_count(); ++p) {
    if (!state.masks[key].data()[p]) continue;
    std::copy_n(reference.pixel(p), 3, key_image.pixel(p));
    state.masks[key].data()[p] = 0;
  }
  for (int step : {1, -1}) {
    for (int i = key + step; i >= 0 && i < length; i += step) {
      const int prev = i - step;
      const FlowField& flow = adjacent_flow(flows, i, prev);
      const Mask prev_missing = mask_union(state.masks[prev], state.invalid[prev]);
      const Image& prev_image = state.images[prev];
      Image& image = state.images[i];
      Mask& hole = state.masks[i];
      for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
          if (!hole(x, y) || !flow.is_valid(x, y)) continue;
          const auto s = bilinear_sample(prev_image, &prev_missing, x + double(flow.dx(x, y)),
                                         y + double(flow.dy(x, y)));
          if (!s.valid) continue;
          for (int c = 0; c < 3; ++c) image(x, y, c) = s.value[c];
          hole(x, y) = 0;
        }
      }
    }
  }
  return state;
}

}  // namespace flowpull
