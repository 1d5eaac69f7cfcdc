#pragma once

// Highest-density-region contours of |psi|^2: for each probability p, the
// density threshold whose superlevel set holds mass p, traced by marching
// squares.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/quantum/grid.hpp"

namespace vortexpin {

struct ContourLine {
  double level = 0.0;      // enclosed probability
  double threshold = 0.0;  // density value on the line
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

inline double hdr_threshold(const std::vector<double>& density, double p) {
  std::vector<double> d = density;
  std::sort(d.begin(), d.end(), std::greater<>());
  double total = 0.0;
  for (double v : d) total += v;
  double acc = 0.0;
  for (double v : d) {
    acc += v;
    if (acc >= p * total) return v;
  }
  return d.back();
}

namespace detail {

// Edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(i*ny+j), vertical (i,j)-(i,j+1) -> +1.
inline std::vector<ContourLine> trace_level(const WaveFunctionGrid& g, const std::vector<double>& d, double thr) {
  const std::size_t nx = g.nx, ny = g.ny;
  auto val = [&](std::size_t i, std::size_t j) { return d[i * ny + j]; };
  auto edge_point = [&](std::size_t id) -> std::array<double, 2> {
    const std::size_t cell = id / 2;
    const std::size_t i = cell / ny, j = cell % ny;
    const bool vert = id % 2;
    const std::size_t i2 = vert ? i : i + 1, j2 = vert ? j + 1 : j;
    const double a = val(i, j), b = val(i2, j2);
    const double s = (thr - a) / (b - a);
    return {g.x(i) + s * (g.x(i2) - g.x(i)), g.y(j) + s * (g.y(j2) - g.y(j))};
  };
  std::multimap<std::size_t, std::size_t> adj;
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const bool b0 = val(i, j) >= thr, b1 = val(i + 1, j) >= thr, b2 = val(i + 1, j + 1) >= thr,
                 b3 = val(i, j + 1) >= thr;
      const std::size_t bottom = 2 * (i * ny + j), right = 2 * ((i + 1) * ny + j) + 1,
                        top = 2 * (i * ny + j + 1), left = 2 * (i * ny + j) + 1;
      std::vector<std::size_t> cut;
      if (b0 != b1) cut.push_back(bottom);
      if (b1 != b2) cut.push_back(right);
      if (b2 != b3) cut.push_back(top);
      if (b3 != b0) cut.push_back(left);
      if (cut.size() == 2) {
        segs.push_back({cut[0], cut[1]});
      } else if (cut.size() == 4) {
        // saddle: decide by the cell-centre average
        const bool c = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1)) >= thr;
        if (c == b0) {
          segs.push_back({bottom, right});
          segs.push_back({top, left});
        } else {
          segs.push_back({bottom, left});
          segs.push_back({right, top});
        }
      }
    }
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    adj.insert({segs[s].first, s});
    adj.insert({segs[s].second, s});
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<ContourLine> lines;
  auto next_seg = [&](std::size_t edge, std::size_t from) -> long {
    auto range = adj.equal_range(edge);
    for (auto it = range.first; it != range.second; ++it)
      if (it->second != from && !used[it->second]) return long(it->second);
    return -1;
  };
  for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (used[s0]) continue;
    used[s0] = true;
    std::vector<std::size_t> chain{segs[s0].first, segs[s0].second};
    // extend forward, then backward
    for (int pass = 0; pass < 2; ++pass) {
      std::size_t cur = s0;
      while (true) {
        const std::size_t edge = chain.back();
        const long n = next_seg(edge, cur);
        if (n < 0) break;
        used[n] = true;
        cur = std::size_t(n);
        chain.push_back(segs[cur].first == edge ? segs[cur].second : segs[cur].first);
      }
      std::reverse(chain.begin(), chain.end());
    }
    ContourLine L;
    L.threshold = thr;
    L.closed = chain.front() == chain.back();
    for (std::size_t e : chain) L.points.push_back(edge_point(e));
    lines.push_back(std::move(L));
  }
  return lines;
}

}  // namespace detail

inline std::vector<ContourLine> probability_contours(const WaveFunctionGrid& g, const std::vector<double>& levels) {
  if (g.values.empty()) throw validation_error("probability_contours: empty grid");
  std::vector<double> d(g.values.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::norm(g.values[k]);
  std::vector<ContourLine> out;
  for (double p : levels) {
    if (!(p > 0.0 && p < 1.0)) throw validation_error("contour levels must lie in (0, 1)");
    const double thr = hdr_threshold(d, p);
    for (auto& L : detail::trace_level(g, d, thr)) {
      L.level = p;
      out.push_back(std::move(L));
    }
  }
  return out;
}

// CSV rows "level,vertex,x,y"; the vertex index restarts at 0 for each line.
inline std::string contours_csv(const std::vector<ContourLine>& lines) {
  std::string out = "level,vertex,x,y\n";
  for (const auto& L : lines)
    for (std::size_t k = 0; k < L.points.size(); ++k)
      out += fmt17(L.level) + "," + std::to_string(k) + "," + fmt17(L.points[k][0]) + "," + fmt17(L.points[k][1]) +
             "\n";
  return out;
}

}  // namespace vortexpin
