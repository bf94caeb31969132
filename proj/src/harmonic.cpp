#include "flowpull/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace flowpull {

namespace {

struct Component {
  std::vector<int> pixels;  // linear indices, raster order
  int min_x, max_x, min_y, max_y;
};

std::vector<Component> label_components(const Mask& hole) {
  const int w = hole.width();
  const int h = hole.height();
  std::vector<int> seen(hole.pixel_count(), 0);
  std::vector<Component> components;
  std::vector<int> stack;
  for (int start = 0; start < static_cast<int>(hole.pixel_count()); ++start) {
    if (!hole.data()[start] || seen[start]) continue;
    Component comp{{}, w, -1, h, -1};
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      comp.pixels.push_back(p);
      const int x = p % w;
      const int y = p / w;
      comp.min_x = std::min(comp.min_x, x);
      comp.max_x = std::max(comp.max_x, x);
      comp.min_y = std::min(comp.min_y, y);
      comp.max_y = std::max(comp.max_y, y);
      const int nbs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbs) {
        if (!hole.contains(nb[0], nb[1])) continue;
        const int q = nb[1] * w + nb[0];
        if (hole.data()[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    std::sort(comp.pixels.begin(), comp.pixels.end());
    components.push_back(std::move(comp));
  }
  return components;
}

}  // namespace

template <int C>
HarmonicStats harmonic_fill(Raster<float, C>& field, const Mask& hole,
                            const std::array<float, C>& fallback,
                            const HarmonicOptions& options) {
  if (!field.same_shape(hole)) throw Error("harmonic_fill: resolution mismatch");
  HarmonicStats stats;
  const int w = field.width();
  const auto components = label_components(hole);
  stats.components = static_cast<int>(components.size());
  if (components.empty()) return stats;

  std::vector<int> local(field.pixel_count(), -1);
  for (const Component& comp : components) {
    const int n = static_cast<int>(comp.pixels.size());
    for (int k = 0; k < n; ++k) local[comp.pixels[k]] = k;

    std::vector<double> known_sum(static_cast<std::size_t>(n) * C, 0.0);
    std::vector<double> inv_degree(n, 0.0);
    std::vector<std::array<int, 4>> unknown(n);
    std::array<double, C> boundary_mean{};
    std::size_t boundary_count = 0;

    for (int k = 0; k < n; ++k) {
      const int p = comp.pixels[k];
      const int x = p % w;
      const int y = p / w;
      const int nbs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      int degree = 0;
      int u = 0;
      unknown[k].fill(-1);
      for (const auto& nb : nbs) {
        if (!field.contains(nb[0], nb[1])) continue;
        ++degree;
        const int q = nb[1] * w + nb[0];
        if (hole.data()[q]) {
          unknown[k][u++] = local[q];
        } else {
          const float* v = field.pixel(q);
          for (int c = 0; c < C; ++c) {
            known_sum[k * C + c] += v[c];
            boundary_mean[c] += v[c];
          }
          ++boundary_count;
        }
      }
      inv_degree[k] = degree > 0 ? 1.0 / degree : 0.0;
    }

    if (boundary_count == 0) {
      ++stats.unbounded_components;
      for (int p : comp.pixels) {
        for (int c = 0; c < C; ++c) field.pixel(p)[c] = fallback[c];
      }
      continue;
    }

    std::vector<double> values(static_cast<std::size_t>(n) * C);
    for (int c = 0; c < C; ++c) boundary_mean[c] /= static_cast<double>(boundary_count);
    for (int k = 0; k < n; ++k) {
      for (int c = 0; c < C; ++c) values[k * C + c] = boundary_mean[c];
    }

    const int extent = std::max(comp.max_x - comp.min_x, comp.max_y - comp.min_y) + 1;
    const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi / (extent + 1)));

    auto neighbor_mean = [&](int k, int c) {
      double s = known_sum[k * C + c];
      for (int idx : unknown[k]) {
        if (idx < 0) break;
        s += values[idx * C + c];
      }
      return s * inv_degree[k];
    };
    auto residual = [&]() {
      double r = 0.0;
      for (int k = 0; k < n; ++k) {
        for (int c = 0; c < C; ++c) {
          r = std::max(r, std::abs(neighbor_mean(k, c) - values[k * C + c]));
        }
      }
      return r;
    };

    constexpr int kCheckInterval = 8;
    int sweeps = 0;
    bool converged = residual() < options.tolerance;
    while (!converged && sweeps < options.max_sweeps) {
      for (int k = 0; k < n; ++k) {
        for (int c = 0; c < C; ++c) {
          double& v = values[k * C + c];
          v += omega * (neighbor_mean(k, c) - v);
        }
      }
      ++sweeps;
      if (sweeps % kCheckInterval == 0 || sweeps == options.max_sweeps) {
        converged = residual() < options.tolerance;
      }
    }
    stats.max_sweeps_used = std::max(stats.max_sweeps_used, sweeps);
    stats.converged = stats.converged && converged;

    for (int k = 0; k < n; ++k) {
      float* out = field.pixel(comp.pixels[k]);
      for (int c = 0; c < C; ++c) out[c] = static_cast<float>(values[k * C + c]);
    }
  }
  return stats;
}

template HarmonicStats harmonic_fill<2>(Raster<float, 2>&, const Mask&,
                                        const std::array<float, 2>&,
                                        const HarmonicOptions&);
template HarmonicStats harmonic_fill<3>(Raster<float, 3>&, const Mask&,
                                        const std::array<float, 3>&,
                                        const HarmonicOptions&);

}  // namespace flowpull
