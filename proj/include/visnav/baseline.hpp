#pragma once

// Ground-truth machinery for tests and benchmarks: voxel-grid A* optimal
// lengths, the exhaustive all-pairs visibility graph, and dense-sampling
// collision checks. Correct and simple beats fast here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "visnav/map.hpp"
#include "visnav/path_search.hpp"
#include "visnav/vgraph.hpp"

namespace visnav {

struct VoxelGrid3D {
  double resolution = 0.15;
  Point3 origin;
  int nx = 1, ny = 1, nz = 1;
  std::vector<std::uint8_t> occupancy;  // x + nx*(y + ny*z)

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
  }
  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  bool occupied(int x, int y, int z) const { return occupancy[index(x, y, z)] != 0; }
  Point3 center(int x, int y, int z) const {
    return {origin.x + (x + 0.5) * resolution, origin.y + (y + 0.5) * resolution,
            origin.z + (z + 0.5) * resolution};
  }
  std::optional<std::tuple<int, int, int>> cell_of(const Point3& p) const {
    const int x = static_cast<int>(std::floor((p.x - origin.x) / resolution));
    const int y = static_cast<int>(std::floor((p.y - origin.y) / resolution));
    const int z = static_cast<int>(std::floor((p.z - origin.z) / resolution));
    if (!in_bounds(x, y, z)) return std::nullopt;
    return std::make_tuple(x, y, z);
  }
};

// Rasterizes the planner's own inflated polygon model, so oracle and
// planner disagree only about search, never about the obstacle set.
inline VoxelGrid3D voxelize_map(const PolyhedralMap& map, const Point3& lo, const Point3& hi,
                                double resolution) {
  VoxelGrid3D g;
  g.resolution = resolution;
  g.origin = lo;
  g.nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / resolution)));
  g.ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / resolution)));
  // z truncates: a partial top row would open a spurious free sliver above
  // obstacles that reach exactly to the ceiling.
  g.nz = std::max(1, static_cast<int>(std::floor((hi.z - lo.z) / resolution + kGeomTol)));
  g.occupancy.assign(static_cast<std::size_t>(g.nx) * g.ny * g.nz, 0);
  for (int z = 0; z < g.nz; ++z) {
    const double cz = lo.z + (z + 0.5) * resolution;
    const int li = map.base.layer_of_z(cz);
    if (li < 0) continue;
    const auto& polys = map.base.polygons[li];
    if (polys.empty()) continue;
    for (int y = 0; y < g.ny; ++y) {
      for (int x = 0; x < g.nx; ++x) {
        const Point2 c{lo.x + (x + 0.5) * resolution, lo.y + (y + 0.5) * resolution};
        if (!map.layer_grids.empty()) {
          for (std::int32_t pi : map.layer_grids[li].candidates_at(c)) {
            if (point_in_polygon(c, polys[pi])) {
              g.occupancy[g.index(x, y, z)] = 1;
              break;
            }
          }
        } else {
          for (const auto& poly : polys) {
            if (point_in_polygon(c, poly)) {
              g.occupancy[g.index(x, y, z)] = 1;
              break;
            }
          }
        }
      }
    }
  }
  return g;
}

namespace detail {

struct GridNeighbor {
  int dx, dy, dz;
  double cost;  // in cells
};

inline const std::vector<GridNeighbor>& grid26() {
  static const std::vector<GridNeighbor> k = [] {
    std::vector<GridNeighbor> v;
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          v.push_back({dx, dy, dz, std::sqrt(double(dx * dx + dy * dy + dz * dz))});
        }
      }
    }
    return v;
  }();
  return k;
}

inline std::optional<Path> grid_search(const VoxelGrid3D& grid, const Point3& start,
                                       const Point3& goal, bool use_heuristic) {
  const auto sc = grid.cell_of(start);
  const auto gc = grid.cell_of(goal);
  if (!sc || !gc) return std::nullopt;
  const auto [sx, sy, sz] = *sc;
  const auto [gx, gy, gz] = *gc;
  if (grid.occupied(sx, sy, sz) || grid.occupied(gx, gy, gz)) return std::nullopt;

  const std::size_t n = grid.occupancy.size();
  std::vector<double> g_cost(n, std::numeric_limits<double>::max());
  std::vector<std::int32_t> pred(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  // Exact free-space 26-connectivity distance (3D octile): admissible and
  // consistent for this metric, and perfect in open space.
  const auto h = [&](int x, int y, int z) {
    if (!use_heuristic) return 0.0;
    int d[3] = {std::abs(x - gx), std::abs(y - gy), std::abs(z - gz)};
    std::sort(d, d + 3);  // d[2] >= d[1] >= d[0] after reverse indexing below
    const double a = d[2], b = d[1], c = d[0];
    return grid.resolution * ((a - b) + (b - c) * std::sqrt(2.0) + c * std::sqrt(3.0));
  };
  using Entry = std::tuple<double, double, std::int64_t>;  // f, g, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t s_idx = grid.index(sx, sy, sz);
  const std::size_t g_idx = grid.index(gx, gy, gz);
  g_cost[s_idx] = 0.0;
  open.emplace(h(sx, sy, sz), 0.0, static_cast<std::int64_t>(s_idx));
  const auto& nbrs = detail::grid26();
  while (!open.empty()) {
    const auto [f, gu, ui] = open.top();
    open.pop();
    const std::size_t u = static_cast<std::size_t>(ui);
    if (closed[u] || gu != g_cost[u]) continue;
    closed[u] = 1;
    if (u == g_idx) break;
    const int uz = static_cast<int>(u / (static_cast<std::size_t>(grid.nx) * grid.ny));
    const std::size_t rem = u % (static_cast<std::size_t>(grid.nx) * grid.ny);
    const int uy = static_cast<int>(rem / grid.nx);
    const int ux = static_cast<int>(rem % grid.nx);
    for (const auto& nb : nbrs) {
      const int vx = ux + nb.dx, vy = uy + nb.dy, vz = uz + nb.dz;
      if (!grid.in_bounds(vx, vy, vz) || grid.occupied(vx, vy, vz)) continue;
      const std::size_t v = grid.index(vx, vy, vz);
      if (closed[v]) continue;
      const double ng = gu + nb.cost * grid.resolution;
      if (ng < g_cost[v]) {
        g_cost[v] = ng;
        pred[v] = static_cast<std::int32_t>(u);
        open.emplace(ng + h(vx, vy, vz), ng, static_cast<std::int64_t>(v));
      }
    }
  }
  if (g_cost[g_idx] == std::numeric_limits<double>::max()) return std::nullopt;

  std::vector<Point3> rev;
  for (std::int64_t v = static_cast<std::int64_t>(g_idx);;) {
    const int vz = static_cast<int>(v / (static_cast<std::int64_t>(grid.nx) * grid.ny));
    const std::int64_t rem = v % (static_cast<std::int64_t>(grid.nx) * grid.ny);
    rev.push_back(grid.center(static_cast<int>(rem % grid.nx),
                              static_cast<int>(rem / grid.nx), vz));
    if (v == static_cast<std::int64_t>(s_idx)) break;
    v = pred[static_cast<std::size_t>(v)];
  }
  std::reverse(rev.begin(), rev.end());
  Path p;
  p.waypoints = std::move(rev);
  p.length = g_cost[g_idx];
  return p;
}

}  // namespace detail

// Optimal 26-connected grid path with exact diagonal costs; length between
// voxel centers, in meters.
inline std::optional<Path> astar_26(const VoxelGrid3D& grid, const Point3& start,
                                    const Point3& goal) {
  return detail::grid_search(grid, start, goal, true);
}

// Oracle-of-the-oracle: identical metric, no heuristic.
inline std::optional<Path> dijkstra_grid(const VoxelGrid3D& grid, const Point3& start,
                                         const Point3& goal) {
  return detail::grid_search(grid, start, goal, false);
}

// All-pairs O(n^3 log n) construction; test oracle for the heuristic
// builder's subset property.
inline VisibilityGraph exhaustive_vgraph(const PolyhedralMap& map) {
  VisibilityGraph g;
  g.vertices = map.vertices;
  for (std::size_t i = 0; i < map.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < map.vertices.size(); ++j) {
      const auto& a = map.vertices[i];
      const auto& b = map.vertices[j];
      if (check_visibility({a.position, b.position}, map)) {
        g.edges.push_back({a.id, b.id, distance(a.position, b.position),
                           a.layer == b.layer ? EdgeKind::same_layer : EdgeKind::inter_layer});
      }
    }
  }
  g.rebuild_adjacency();
  return g;
}

// ---------------------------------------------------------------------------
// Dense-sampling collision oracle: 0.01 m steps, strict interior with a
// 1e-6 m margin so contour-riding paths (whose vertices sit exactly on
// polygon boundaries) do not self-report collisions.

inline constexpr double kOracleStep = 0.01;
inline constexpr double kOracleMargin = 1e-6;

inline bool segment_collides_sampled(const PolyhedralMap& map, const Segment3& seg,
                                     double step = kOracleStep) {
  const double len = seg.length();
  const int k = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= k; ++i) {
    const Point3 p = seg.at(static_cast<double>(i) / k);
    if (point_strictly_in_layered_obstacle(map, p, kOracleMargin)) return true;
  }
  return false;
}

inline bool path_collides_sampled(const PolyhedralMap& map, const Path& path,
                                  double step = kOracleStep) {
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    if (segment_collides_sampled(map, {path.waypoints[i - 1], path.waypoints[i]}, step)) {
      return true;
    }
  }
  return false;
}

// Sampling-based visibility reference (same convention as the fast
// predicate: blocked only by strict interior penetration).
inline bool visible_by_sampling(const PolyhedralMap& map, const Segment3& seg,
                                double step = kOracleStep) {
  return !segment_collides_sampled(map, seg, step);
}

}  // namespace visnav
