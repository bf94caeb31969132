#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "flowpull/propagation.hpp"
#include "flowpull/types.hpp"

namespace oracles {

using namespace flowpull;

// Dense direct solve of the 5-point Laplace system over the hole pixels,
// dropping neighbors outside the image.
template <int C>
Raster<float, C> dense_laplace(const Raster<float, C>& field, const Mask& hole) {
  std::map<int, int> index;
  const int w = field.width(), h = field.height();
  for (int p = 0; p < w * h; ++p)
    if (hole.data()[p]) index.emplace(p, static_cast<int>(index.size()));
  const int n = static_cast<int>(index.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, C);
  for (const auto& [p, row] : index) {
    const int x = p % w, y = p / w;
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
      a(row, row) += 1.0;
      const int q = ny[k] * w + nx[k];
      if (hole.data()[q]) {
        a(row, index.at(q)) -= 1.0;
      } else {
        for (int c = 0; c < C; ++c) b(row, c) += field(nx[k], ny[k], c);
      }
    }
  }
  const Eigen::MatrixXd u = a.fullPivLu().solve(b);
  Raster<float, C> out = field;
  for (const auto& [p, row] : index)
    for (int c = 0; c < C; ++c) out.pixel(p)[c] = static_cast<float>(u(row, c));
  return out;
}

inline double mask_bilinear(const Mask& m, double x, double y) {
  if (!(x >= 0 && y >= 0 && x <= m.width() - 1 && y <= m.height() - 1)) return 0.0;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  double v = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const double wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
      if (wgt == 0.0) continue;
      v += wgt * m(x0 + dx, y0 + dy);
    }
  return v;
}

// Direct double sum over frames j and pixels p.
inline double connection_oracle(const PropagationState& s, const FlowSet& flows, int i) {
  double total = 0.0;
  for (int j = 0; j < s.length(); ++j) {
    const auto map = chain_to(flows, i, j);
    for (int y = 0; y < s.masks[i].height(); ++y)
      for (int x = 0; x < s.masks[i].width(); ++x) {
        if (!s.masks[i](x, y) || !map.flow.is_valid(x, y)) continue;
        total += mask_bilinear(s.masks[j], x + double(map.flow.dx(x, y)),
                               y + double(map.flow.dy(x, y)));
      }
  }
  return total;
}

}  // namespace oracles
