#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "nlx/coverage.hpp"

namespace nlx::oracle {

// Brute-force supporting half-planes: every ordered pair (a, b) of input
// points with all points on or left of a->b bounds the hull.
struct HalfPlane {
  Point2D a, b;
};

inline double side(Point2D a, Point2D b, Point2D p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

inline std::vector<HalfPlane> supporting_half_planes(const std::vector<Point2D>& pts) {
  std::vector<HalfPlane> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (pts[i] == pts[j]) continue;
      bool supporting = true;
      for (const auto& p : pts) {
        if (side(pts[i], pts[j], p) < 0) {
          supporting = false;
          break;
        }
      }
      if (supporting) out.push_back({pts[i], pts[j]});
    }
  }
  return out;
}

// Signed margin of p inside the half-plane intersection: min over planes of
// the distance to each line, negative when outside some plane.
inline double margin(const std::vector<HalfPlane>& planes, Point2D p) {
  double m = 1e300;
  for (const auto& h : planes) {
    const double len = std::hypot(h.b.x - h.a.x, h.b.y - h.a.y);
    m = std::min(m, side(h.a, h.b, p) / len);
  }
  return m;
}

inline std::vector<Point2D> random_points(std::mt19937_64& rng, std::size_t n, double cx, double cy,
                                          double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Point2D> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({cx + u(rng), cy + u(rng)});
  return out;
}

// Monte Carlo estimate of the overlap of two point sets' hulls, sampling the
// bounding box of the first set.
inline double monte_carlo_overlap(const std::vector<Point2D>& a, const std::vector<Point2D>& b,
                                  std::size_t samples, std::uint64_t seed) {
  const auto pa = supporting_half_planes(a);
  const auto pb = supporting_half_planes(b);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : a) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point2D p{ux(rng), uy(rng)};
    if (margin(pa, p) >= 0 && margin(pb, p) >= 0) ++hits;
  }
  return (x1 - x0) * (y1 - y0) * static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace nlx::oracle
