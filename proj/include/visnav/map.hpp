#pragma once

// Layered obstacle maps: per-slab occupancy grids, the layered polygon map,
// and the polyhedral map (polygons + vertical contour connections) that the
// visibility predicate runs against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "visnav/geometry.hpp"

namespace visnav {

using VertexId = std::int32_t;
inline constexpr VertexId kInvalidVertex = -1;

struct OccupancyGrid2D {
  double resolution = 0.15;
  Point2 origin;  // world position of cell (0,0) lower corner
  int width = 1;
  int height = 1;
  std::vector<std::uint8_t> cells;  // row-major, y * width + x

  static OccupancyGrid2D make(double resolution, Point2 origin, int width, int height) {
    OccupancyGrid2D g;
    g.resolution = resolution;
    g.origin = origin;
    g.width = width;
    g.height = height;
    g.cells.assign(static_cast<std::size_t>(width) * height, 0);
    return g;
  }

  bool in_bounds(int cx, int cy) const { return cx >= 0 && cx < width && cy >= 0 && cy < height; }
  bool occupied(int cx, int cy) const {
    return in_bounds(cx, cy) && cells[static_cast<std::size_t>(cy) * width + cx] != 0;
  }
  void set(int cx, int cy, bool value = true) {
    cells[static_cast<std::size_t>(cy) * width + cx] = value ? 1 : 0;
  }
  Point2 cell_center(int cx, int cy) const {
    return {origin.x + (cx + 0.5) * resolution, origin.y + (cy + 0.5) * resolution};
  }
  // Lower corner of cell (cx, cy); the lattice the contour tracer walks.
  Point2 cell_corner(int cx, int cy) const {
    return {origin.x + cx * resolution, origin.y + cy * resolution};
  }
  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c != 0;
    return n;
  }
};

struct LayeredPolygonMap {
  std::vector<LayerSlab> slabs;
  std::vector<std::vector<Polygon2D>> polygons;  // one list per slab
  double resolution = 0.15;
  double inflation_radius = 0.0;

  int layer_count() const { return static_cast<int>(slabs.size()); }
  double slab_height() const { return slabs.empty() ? 0.0 : slabs.front().height(); }

  // Index of the slab containing z (boundary z resolves to the lower slab).
  int layer_of_z(double z) const {
    for (int i = 0; i < layer_count(); ++i) {
      if (slabs[i].contains_z(z, kGeomTol)) return i;
    }
    return -1;
  }
};

enum class VertexOrigin : std::uint8_t { extracted, sampled };

struct GraphVertex {
  VertexId id = kInvalidVertex;
  Point3 position;
  int layer = 0;
  int polygon_id = -1;  // -1 for sampled / inserted points
  VertexOrigin origin = VertexOrigin::extracted;
};

namespace detail {

// Per-layer uniform grid over polygon bounding boxes. Visibility queries
// walk the cells crossed by a segment and test only the polygons
// registered there, so blocked segments exit early at the first obstacle
// along the walk.
struct LayerGrid {
  Aabb2 bounds;
  double cell = 2.0;
  int nx = 0;
  int ny = 0;
  std::vector<std::vector<std::int32_t>> cells;  // polygon indices per cell

  void build(const std::vector<Polygon2D>& polys, double cell_size) {
    cell = cell_size;
    bounds = Aabb2{};
    for (const auto& p : polys) {
      bounds.expand(p.bbox().min);
      bounds.expand(p.bbox().max);
    }
    if (bounds.empty()) {
      nx = ny = 0;
      cells.clear();
      return;
    }
    nx = std::max(1, static_cast<int>(std::ceil((bounds.max.x - bounds.min.x) / cell)));
    ny = std::max(1, static_cast<int>(std::ceil((bounds.max.y - bounds.min.y) / cell)));
    cells.assign(static_cast<std::size_t>(nx) * ny, {});
    for (std::size_t pi = 0; pi < polys.size(); ++pi) {
      const Aabb2& bb = polys[pi].bbox();
      const auto [x0, y0] = cell_of(bb.min);
      const auto [x1, y1] = cell_of(bb.max);
      for (int cy = y0; cy <= y1; ++cy) {
        for (int cx = x0; cx <= x1; ++cx) {
          cells[static_cast<std::size_t>(cy) * nx + cx].push_back(static_cast<std::int32_t>(pi));
        }
      }
    }
  }

  std::pair<int, int> cell_of(const Point2& p) const {
    int cx = static_cast<int>(std::floor((p.x - bounds.min.x) / cell));
    int cy = static_cast<int>(std::floor((p.y - bounds.min.y) / cell));
    return {std::clamp(cx, 0, nx - 1), std::clamp(cy, 0, ny - 1)};
  }

  const std::vector<std::int32_t>& at(int cx, int cy) const {
    return cells[static_cast<std::size_t>(cy) * nx + cx];
  }

  // Visits candidate polygon indices in the order cells are crossed from
  // seg.a to seg.b; visitor returns false to stop the walk.
  template <typename Visitor>
  void walk(const Segment2& seg, Visitor&& visit) const {
    if (nx == 0) return;
    Aabb2 seg_box;
    seg_box.expand(seg.a);
    seg_box.expand(seg.b);
    if (!seg_box.overlaps(bounds, kGeomTol)) return;

    auto [cx, cy] = cell_of(seg.a);
    const auto [ex, ey] = cell_of(seg.b);
    const double dx = seg.b.x - seg.a.x;
    const double dy = seg.b.y - seg.a.y;
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::max();
    double t_max_x = inf, t_max_y = inf, t_dx = inf, t_dy = inf;
    if (step_x != 0) {
      const double edge = bounds.min.x + (cx + (step_x > 0 ? 1 : 0)) * cell;
      t_max_x = (edge - seg.a.x) / dx;
      t_dx = cell / std::abs(dx);
    }
    if (step_y != 0) {
      const double edge = bounds.min.y + (cy + (step_y > 0 ? 1 : 0)) * cell;
      t_max_y = (edge - seg.a.y) / dy;
      t_dy = cell / std::abs(dy);
    }
    // Bounded by the grid diagonal; guards against FP corner cases.
    for (int guard = nx + ny + 2; guard > 0; --guard) {
      for (std::int32_t pi : at(cx, cy)) {
        if (!visit(pi)) return;
      }
      if (cx == ex && cy == ey) return;
      if (t_max_x < t_max_y) {
        if (cx == ex || step_x == 0) {
          if (cy == ey || step_y == 0) return;
          cy += step_y;
          t_max_y += t_dy;
        } else {
          cx += step_x;
          t_max_x += t_dx;
        }
      } else {
        if (cy == ey || step_y == 0) {
          if (cx == ex || step_x == 0) return;
          cx += step_x;
          t_max_x += t_dx;
        } else {
          cy += step_y;
          t_max_y += t_dy;
        }
      }
    }
  }

  // Candidate polygons whose bounding box may contain p (tol widens the
  // acceptance band at the grid border; cell_of clamps into range).
  const std::vector<std::int32_t>& candidates_at(const Point2& p, double tol = kGeomTol) const {
    static const std::vector<std::int32_t> kEmpty;
    if (nx == 0 || !bounds.contains(p, tol)) return kEmpty;
    const auto [cx, cy] = cell_of(p);
    return at(cx, cy);
  }
};

}  // namespace detail

// Layered polygons plus vertical contour connections: the obstacle model
// every visibility query runs against. Immutable after construction.
struct PolyhedralMap {
  LayeredPolygonMap base;
  std::vector<GraphVertex> vertices;  // id == index, layer-major order
  std::vector<std::pair<VertexId, VertexId>> vertical_edges;  // (lower, upper)
  std::vector<std::uint8_t> top_layer_mark;                   // per vertex

  // Derived lookups, filled by finalize().
  std::vector<std::vector<VertexId>> up_links;
  std::vector<std::vector<VertexId>> down_links;
  std::vector<detail::LayerGrid> layer_grids;

  int layer_count() const { return base.layer_count(); }
  bool empty() const { return vertices.empty(); }

  void finalize() {
    up_links.assign(vertices.size(), {});
    down_links.assign(vertices.size(), {});
    for (const auto& [lo, hi] : vertical_edges) {
      up_links[lo].push_back(hi);
      down_links[hi].push_back(lo);
    }
    top_layer_mark.assign(vertices.size(), 0);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      top_layer_mark[i] = up_links[i].empty() ? 1 : 0;
    }
    layer_grids.assign(base.slabs.size(), {});
    const double cell = std::max(1.0, 8.0 * base.resolution);
    for (std::size_t li = 0; li < base.slabs.size(); ++li) {
      layer_grids[li].build(base.polygons[li], cell);
    }
  }

  const std::vector<VertexId>& vertical_neighbors_up(VertexId v) const { return up_links[v]; }
  const std::vector<VertexId>& vertical_neighbors_down(VertexId v) const { return down_links[v]; }
};

// True when the clipped projection of seg is blocked in layer `li`.
inline bool layer_blocks_segment(const PolyhedralMap& map, int li, const Segment2& sub) {
  const auto& polys = map.base.polygons[li];
  if (polys.empty()) return false;
  bool blocked = false;
  if (!map.layer_grids.empty()) {
    std::int32_t tested[64];
    int tested_n = 0;
    map.layer_grids[li].walk(sub, [&](std::int32_t pi) {
      for (int k = 0; k < tested_n; ++k) {
        if (tested[k] == pi) return true;
      }
      if (tested_n < 64) tested[tested_n++] = pi;
      if (segment_enters_polygon(sub, polys[pi])) {
        blocked = true;
        return false;
      }
      return true;
    });
    if (tested_n < 64) return blocked;
    // Overflowed the dedup scratch: fall through to the exhaustive scan.
    if (blocked) return true;
  }
  for (const auto& poly : polys) {
    if (segment_enters_polygon(sub, poly)) return true;
  }
  return false;
}

// Layered visibility: seg is visible iff, in every slab its z-range
// overlaps, the clipped 2D projection never penetrates a polygon interior.
// Contact with contour boundaries (where all graph vertices live) does not
// block. Symmetric in its endpoints by construction.
inline bool check_visibility(const Segment3& seg, const PolyhedralMap& map) {
  if (distance(seg.a, seg.b) <= kGeomTol) return true;
  for (int li = 0; li < map.layer_count(); ++li) {
    const auto& slab = map.base.slabs[li];
    if (map.base.polygons[li].empty()) continue;
    const auto clip = clip_params_to_slab(seg, slab);
    if (!clip) continue;
    const Segment2 sub{seg.at(clip->first).xy(), seg.at(clip->second).xy()};
    if (layer_blocks_segment(map, li, sub)) return false;
  }
  return true;
}

// True when p sits strictly inside some polygon of a slab containing p.z.
// Boundary contact does not count: graph vertices and path waypoints live
// exactly on contours.
inline bool point_strictly_in_layered_obstacle(const PolyhedralMap& map, const Point3& p,
                                               double margin = kGeomTol) {
  const Point2 q = p.xy();
  for (int li = 0; li < map.layer_count(); ++li) {
    if (!map.base.slabs[li].contains_z(p.z, kGeomTol)) continue;
    if (map.layer_grids.empty()) {
      for (const auto& poly : map.base.polygons[li]) {
        if (point_strictly_inside(q, poly, margin)) return true;
      }
    } else {
      for (std::int32_t pi : map.layer_grids[li].candidates_at(q)) {
        if (point_strictly_inside(q, map.base.polygons[li][pi], margin)) return true;
      }
    }
  }
  return false;
}

// Point-level collision against the layered map: obstacles are closed, and
// an optional margin widens them. Used for terminal checks.
inline bool point_in_layered_obstacle(const PolyhedralMap& map, const Point3& p,
                                      double margin = 0.0) {
  const Point2 q = p.xy();
  const auto hits = [&](const Polygon2D& poly) {
    if (!poly.bbox().contains(q, margin + kGeomTol)) return false;
    if (polygon_boundary_distance(q, poly) <= margin + kGeomTol) return true;
    return crossing_parity_inside(q, poly);
  };
  // The grid shortcut only resolves single-cell lookups; margin queries can
  // straddle cells, so they scan every polygon in the slab.
  const bool use_grid = !map.layer_grids.empty() && margin <= kGeomTol;
  for (int li = 0; li < map.layer_count(); ++li) {
    if (!map.base.slabs[li].contains_z(p.z, kGeomTol)) continue;
    if (use_grid) {
      for (std::int32_t pi : map.layer_grids[li].candidates_at(q)) {
        if (hits(map.base.polygons[li][pi])) return true;
      }
    } else {
      for (const auto& poly : map.base.polygons[li]) {
        if (hits(poly)) return true;
      }
    }
  }
  return false;
}

}  // namespace visnav
