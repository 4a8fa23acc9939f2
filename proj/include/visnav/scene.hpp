#pragma once

// Synthetic test scenes: extruded convex obstacles, canned layouts, a
// deterministic random family, surface point sampling and exact ray casts.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "visnav/geometry.hpp"
#include "visnav/rng.hpp"

namespace visnav {

struct ExtrudedObstacle {
  Polygon2D footprint;  // convex, CCW
  double z_min = 0.0;
  double z_max = 1.0;

  ExtrudedObstacle(Polygon2D fp, double z0, double z1)
      : footprint(std::move(fp)), z_min(z0), z_max(z1) {
    if (z_max <= z_min) throw std::invalid_argument("obstacle z_max <= z_min");
  }
};

struct Scene {
  std::string name;
  Point3 bounds_min{0, 0, 0};
  Point3 bounds_max{1, 1, 1};
  std::vector<ExtrudedObstacle> obstacles;
  Point3 default_start{0, 0, 0};
  Point3 default_goal{1, 1, 0};
};

inline Polygon2D make_box(double cx, double cy, double hx, double hy) {
  return Polygon2D{{{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy}, {cx - hx, cy + hy}}};
}

inline Polygon2D make_rotated_box(double cx, double cy, double hx, double hy, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const double corners[4][2] = {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
  std::vector<Point2> pts;
  for (const auto& lc : corners) {
    pts.push_back({cx + c * lc[0] - s * lc[1], cy + s * lc[0] + c * lc[1]});
  }
  return Polygon2D{pts};
}

inline bool point_in_scene_obstacle(const Scene& scene, const Point3& p, double margin = 0.0) {
  for (const auto& ob : scene.obstacles) {
    if (p.z < ob.z_min - margin || p.z > ob.z_max + margin) continue;
    if (margin <= 0.0) {
      if (point_in_polygon(p.xy(), ob.footprint)) return true;
    } else {
      const Point2 q = p.xy();
      if (ob.footprint.bbox().contains(q, margin) &&
          (crossing_parity_inside(q, ob.footprint) ||
           polygon_boundary_distance(q, ob.footprint) <= margin)) {
        return true;
      }
    }
  }
  return false;
}

inline bool point_strictly_in_scene_obstacle(const Scene& scene, const Point3& p,
                                             double margin = kGeomTol) {
  for (const auto& ob : scene.obstacles) {
    if (p.z <= ob.z_min + margin || p.z >= ob.z_max - margin) continue;
    if (point_strictly_inside(p.xy(), ob.footprint, margin)) return true;
  }
  return false;
}

// First-hit distance of a ray against the union of obstacles, or nullopt
// within max_range. Convex footprints allow a half-plane clip per obstacle.
inline std::optional<double> ray_cast(const Scene& scene, const Point3& origin,
                                      const Point3& dir, double max_range) {
  double best = max_range;
  bool hit = false;
  for (const auto& ob : scene.obstacles) {
    double lo = 0.0, hi = best;
    // z slab
    if (std::abs(dir.z) < kGeomTol) {
      if (origin.z < ob.z_min || origin.z > ob.z_max) continue;
    } else {
      double t0 = (ob.z_min - origin.z) / dir.z;
      double t1 = (ob.z_max - origin.z) / dir.z;
      if (t0 > t1) std::swap(t0, t1);
      lo = std::max(lo, t0);
      hi = std::min(hi, t1);
      if (lo > hi) continue;
    }
    // convex footprint: inside = left of every CCW edge
    const auto& pts = ob.footprint.pts();
    bool empty = false;
    for (std::size_t i = 0; i < pts.size() && !empty; ++i) {
      const Point2 a = pts[i];
      const Point2 b = pts[(i + 1) % pts.size()];
      const Point2 n{b.y - a.y, a.x - b.x};  // outward normal
      const double denom = n.x * dir.x + n.y * dir.y;
      const double num = n.x * (a.x - origin.x) + n.y * (a.y - origin.y);
      if (std::abs(denom) < kGeomTol) {
        if (num < 0) empty = true;  // parallel and outside
      } else {
        const double t = num / denom;
        if (denom > 0) {
          hi = std::min(hi, t);
        } else {
          lo = std::max(lo, t);
        }
        if (lo > hi) empty = true;
      }
    }
    if (empty || lo > hi) continue;
    if (lo < best) {
      best = lo;
      hit = true;
    }
  }
  if (!hit) return std::nullopt;
  return best;
}

inline bool segment_hits_scene_obstacle(const Scene& scene, const Segment3& seg,
                                        double margin = kGeomTol) {
  const double len = seg.length();
  if (len < kGeomTol) return point_strictly_in_scene_obstacle(scene, seg.a, margin);
  const int k = std::max(1, static_cast<int>(std::ceil(len / 0.01)));
  for (int i = 0; i <= k; ++i) {
    if (point_strictly_in_scene_obstacle(scene, seg.at(static_cast<double>(i) / k), margin)) {
      return true;
    }
  }
  return false;
}

// Deterministic surface sampling (sides, top, and bottom when airborne)
// at the given spacing; the "perfect sensor" cloud used by benchmarks.
inline std::vector<Point3> surface_cloud(const Scene& scene, double spacing) {
  std::vector<Point3> out;
  for (const auto& ob : scene.obstacles) {
    const auto& pts = ob.footprint.pts();
    const int nz = std::max(1, static_cast<int>(std::ceil((ob.z_max - ob.z_min) / spacing)));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2 a = pts[i];
      const Point2 b = pts[(i + 1) % pts.size()];
      const double elen = std::hypot(b.x - a.x, b.y - a.y);
      const int ne = std::max(1, static_cast<int>(std::ceil(elen / spacing)));
      for (int e = 0; e < ne; ++e) {  // half-open: corner emitted once
        const double t = static_cast<double>(e) / ne;
        const Point2 q{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        for (int z = 0; z <= nz; ++z) {
          out.push_back({q.x, q.y, ob.z_min + (ob.z_max - ob.z_min) * z / nz});
        }
      }
    }
    // horizontal faces rasterized on a lattice anchored at the bbox corner
    const Aabb2 bb = ob.footprint.bbox();
    const int gx = std::max(1, static_cast<int>(std::ceil((bb.max.x - bb.min.x) / spacing)));
    const int gy = std::max(1, static_cast<int>(std::ceil((bb.max.y - bb.min.y) / spacing)));
    for (int iy = 0; iy <= gy; ++iy) {
      for (int ix = 0; ix <= gx; ++ix) {
        const Point2 q{bb.min.x + (bb.max.x - bb.min.x) * ix / gx,
                       bb.min.y + (bb.max.y - bb.min.y) * iy / gy};
        if (!point_in_polygon(q, ob.footprint)) continue;
        out.push_back({q.x, q.y, ob.z_max});
        if (ob.z_min > scene.bounds_min.z + kGeomTol) out.push_back({q.x, q.y, ob.z_min});
      }
    }
  }
  return out;
}

// --- canned layouts ---------------------------------------------------------

inline Scene scene_wall() {
  Scene s;
  s.name = "wall";
  s.bounds_min = {0, 0, 0};
  s.bounds_max = {20, 20, 8};
  s.obstacles.emplace_back(make_box(10.0, 10.0, 8.0, 0.4), 0.0, 3.0);
  s.default_start = {10.0, 4.0, 0.5};
  s.default_goal = {10.0, 16.0, 0.5};
  return s;
}

inline Scene scene_dead_end() {
  Scene s;
  s.name = "dead_end";
  s.bounds_min = {0, 0, 0};
  s.bounds_max = {30, 30, 5};
  const double top = 5.0;  // flush with the ceiling: no flying out
  // U-shaped pocket opening toward +y
  s.obstacles.emplace_back(make_box(10.0, 12.0, 0.5, 6.0), 0.0, top);   // west wall
  s.obstacles.emplace_back(make_box(20.0, 12.0, 0.5, 6.0), 0.0, top);   // east wall
  s.obstacles.emplace_back(make_box(15.0, 6.5, 5.5, 0.5), 0.0, top);    // closed south end
  s.default_start = {15.0, 10.0, 0.5};  // inside the pocket
  s.default_goal = {15.0, 2.0, 0.5};    // behind the closed end
  return s;
}

inline Scene scene_garage_like() {
  Scene s;
  s.name = "garage_like";
  s.bounds_min = {0, 0, 0};
  s.bounds_max = {40, 30, 6};
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 5; ++ix) {
      s.obstacles.emplace_back(make_box(6.0 + ix * 7.0, 6.0 + iy * 9.0, 0.45, 0.45), 0.0, 6.0);
    }
  }
  s.obstacles.emplace_back(make_box(20.0, 15.0, 4.0, 0.3), 0.0, 2.2);  // low divider
  s.default_start = {2.0, 2.0, 0.5};
  s.default_goal = {38.0, 28.0, 0.5};
  return s;
}

inline Scene scene_factory_like() {
  Scene s;
  s.name = "factory_like";
  s.bounds_min = {0, 0, 0};
  s.bounds_max = {50, 40, 10};
  s.obstacles.emplace_back(make_box(12.0, 10.0, 4.0, 3.0), 0.0, 4.0);
  s.obstacles.emplace_back(make_box(30.0, 12.0, 5.0, 2.5), 0.0, 7.0);
  s.obstacles.emplace_back(make_box(42.0, 25.0, 3.0, 4.0), 0.0, 3.0);
  s.obstacles.emplace_back(make_rotated_box(18.0, 26.0, 6.0, 1.0, 0.5), 0.0, 5.0);
  s.obstacles.emplace_back(make_box(30.0, 30.0, 1.0, 6.0), 0.0, 8.0);
  s.obstacles.emplace_back(make_box(8.0, 30.0, 2.0, 2.0), 2.5, 6.0);  // elevated block
  s.default_start = {2.0, 2.0, 0.5};
  s.default_goal = {48.0, 38.0, 0.5};
  return s;
}

// Seeded random scene: up to `count` extruded boxes in a 50x50x10 volume,
// keeping a clear bubble around start and goal.
inline Scene scene_random(std::uint64_t seed, int count) {
  Scene s;
  s.name = "random_" + std::to_string(seed);
  s.bounds_min = {0, 0, 0};
  s.bounds_max = {50, 50, 10};
  s.default_start = {3.0, 3.0, 0.5};
  s.default_goal = {47.0, 47.0, 0.5};
  Rng rng(mix_seed(seed, 0x5ce7eULL));
  int placed = 0;
  int attempts = 0;
  while (placed < count && attempts < count * 50) {
    ++attempts;
    const double cx = uniform_double(rng, 6.0, 44.0);
    const double cy = uniform_double(rng, 6.0, 44.0);
    const double hx = uniform_double(rng, 0.8, 4.0);
    const double hy = uniform_double(rng, 0.8, 4.0);
    const double ang = uniform_double(rng, 0.0, 3.14159);
    const double h = uniform_double(rng, 1.5, 9.0);
    Polygon2D fp = make_rotated_box(cx, cy, hx, hy, ang);
    const double clear = 2.5;
    const auto too_close = [&](const Point3& p) {
      return fp.bbox().contains(p.xy(), clear);
    };
    if (too_close(s.default_start) || too_close(s.default_goal)) continue;
    s.obstacles.emplace_back(std::move(fp), 0.0, h);
    ++placed;
  }
  return s;
}

inline Scene make_named_scene(const std::string& name, std::uint64_t seed = 1, int count = 12) {
  if (name == "wall") return scene_wall();
  if (name == "dead_end") return scene_dead_end();
  if (name == "garage_like") return scene_garage_like();
  if (name == "factory_like") return scene_factory_like();
  if (name == "random") return scene_random(seed, count);
  throw std::invalid_argument("unknown scene layout: " + name);
}

}  // namespace visnav
