#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowpull/keyvalue.hpp"
#include "flowpull/types.hpp"

namespace flowpull {

// p -> [a b; c d] p + t
struct Affine2 {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  void apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + b * y + tx;
    oy = c * x + d * y + ty;
  }
  double determinant() const { return a * d - b * c; }
  Affine2 inverse() const;
  // (this ∘ other)(p) = this(other(p))
  Affine2 after(const Affine2& other) const;

  static Affine2 translation(double x, double y) { return {1.0, 0.0, x, 0.0, 1.0, y}; }
  // Zoom and rotation about (cx, cy), followed by a translation.
  static Affine2 about(double cx, double cy, double zoom, double rotation_deg, double x,
                       double y);
};

struct TextureSpec {
  int sinusoids = 8;
  double min_period = 4.0;  // pixels
  double max_period = 16.0;
  double noise_share = 0.35;  // fraction of the amplitude budget given to value noise
  double noise_cell = 5.0;    // lattice spacing of the value noise, pixels
};

// Band-limited color texture: sum of random sinusoids plus seeded value noise
// with quintic interpolation. Always in [0,1], smooth in (u, v).
class ProceduralTexture {
 public:
  ProceduralTexture(const TextureSpec& spec, std::uint64_t seed);
  Color at(double u, double v) const;

 private:
  struct Wave {
    double kx, ky, phase;
    std::array<double, 3> amplitude;
  };
  double noise(double u, double v, int channel) const;

  std::vector<Wave> waves_;
  double noise_amplitude_ = 0.0;
  double noise_cell_ = 1.0;
  std::uint64_t seed_ = 0;
};

enum class MotionKind { kStatic, kTranslate, kAffine };
enum class OccluderShape { kDisc, kRect };

struct OccluderSpec {
  OccluderShape shape = OccluderShape::kDisc;
  double x0 = 0.0, y0 = 0.0;  // center in frame 0
  double vx = 0.0, vy = 0.0;  // pixels per frame
  double radius = 8.0;        // disc radius, or half extent of a rect
  double half_height = 8.0;   // rect only
  Color color{0.9f, 0.1f, 0.8f};

  bool covers(int frame, double x, double y) const;
};

struct SceneSpec {
  std::string name = "scene";
  int width = 64;
  int height = 64;
  int length = 10;
  std::uint64_t seed = 1;
  TextureSpec texture;
  MotionKind motion = MotionKind::kStatic;
  // Image-space background motion per frame: translation, plus zoom and
  // rotation about the image center for kAffine.
  double tx = 0.0, ty = 0.0;
  double zoom = 1.0;
  double rotation_deg = 0.0;
  OccluderSpec occluder;
  std::optional<OccluderSpec> positive;  // occluder in front of the target, preserved

  // Per-frame image-space motion of the background (frame i -> i + 1).
  Affine2 step() const;
};

// Keys: name, width, height, length, seed, motion (static|translate|affine),
// tx, ty, zoom, rotation_deg, texture_sinusoids, texture_min_period,
// texture_max_period, texture_noise_share, texture_noise_cell,
// occluder_shape (disc|rect), occluder_x, occluder_y, occluder_vx,
// occluder_vy, occluder_radius, occluder_half_height, and the same
// occluder keys with a `positive_` prefix (enabled by positive = on).
SceneSpec scene_from_config(const KeyValueConfig& config);
void validate_scene(const SceneSpec& spec);

struct Scene {
  Sequence sequence;                // frames, masks, analytic flows, positive masks
  std::vector<Image> ground_truth;  // target occluder removed
};

// Frame i shows the texture at world position step^-i(p), with the positive
// occluder (if any) over the target occluder over the background. Masks are
// the visible target silhouette; flows are the exact background motion.
Scene generate_scene(const SceneSpec& spec);

// Independent random smooth flows (drift plus low-frequency sinusoids), for
// exercising flow chaining on non-rigid motion.
FlowSet random_smooth_flows(int width, int height, int length, std::uint64_t seed,
                            double amplitude = 1.5);

struct TracePoint {
  double x = 0.0;
  double y = 0.0;
  bool valid = false;
};

// Follows pixel (x, y) of frame `from` through adjacent flows one frame at a
// time in double precision until frame `to`. Invalid once any step samples
// outside the frame or touches an invalid flow pixel.
TracePoint brute_force_trace(const FlowSet& flows, int from, int to, double x, double y);

struct OracleAgreement {
  std::size_t jointly_valid = 0;
  std::size_t agreeing = 0;  // within the tolerance
  std::size_t chain_only = 0;
  std::size_t trace_only = 0;
  double max_error = 0.0;  // over jointly valid pixels, pixels
  double fraction() const {
    return jointly_valid ? static_cast<double>(agreeing) / jointly_valid : 1.0;
  }
  void merge(const OracleAgreement& other);
};

// Compares the dense chained map from -> to against brute_force_trace at
// every pixel; positions agree when both coordinates are within `tolerance`.
OracleAgreement compare_with_trace(const FlowSet& flows, int from, int to,
                                   double tolerance = 1e-3);

// Baseline that propagates colors by warping the previously filled color
// buffer frame to frame (sources after the target, then before), and
// verifies the two candidates like the one-shot path.
PropagationState recurrent_warp_baseline(const Sequence& seq, const FlowSet& flows,
                                         double verify_threshold = 1.0);

// Recurrent counterpart of reference propagation: the reference is written
// into frame `key` and is then carried outward one frame at a time.
PropagationState recurrent_reference_propagation(PropagationState state, const FlowSet& flows,
                                                 int key, const Image& reference);

}  // namespace flowpull
