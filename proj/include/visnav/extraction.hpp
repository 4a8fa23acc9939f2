#pragma once

// Point cloud -> polyhedral map pipeline: slab slicing, occupancy
// rasterization, disc inflation, contour tracing, Douglas-Peucker
// simplification and vertical contour connection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "visnav/config.hpp"
#include "visnav/geometry.hpp"
#include "visnav/map.hpp"
#include "visnav/threads.hpp"

namespace visnav {

// ---------------------------------------------------------------------------
// Voxel dedup for accumulated clouds.

struct VoxelKey {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline VoxelKey voxel_key(const Point3& p, double res) {
  return {static_cast<std::int64_t>(std::floor(p.x / res)),
          static_cast<std::int64_t>(std::floor(p.y / res)),
          static_cast<std::int64_t>(std::floor(p.z / res))};
}

// Keeps the first point seen per voxel; order-preserving, so the result is
// deterministic for a deterministic input order.
class VoxelCloud {
 public:
  explicit VoxelCloud(double res = 0.15) : res_(res) {}

  bool insert(const Point3& p) {
    if (seen_.insert(voxel_key(p, res_)).second) {
      points_.push_back(p);
      return true;
    }
    return false;
  }
  void insert_all(const std::vector<Point3>& pts) {
    for (const auto& p : pts) insert(p);
  }
  const std::vector<Point3>& points() const { return points_; }
  double resolution() const { return res_; }

 private:
  double res_;
  std::vector<Point3> points_;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen_;
};

// ---------------------------------------------------------------------------
// Slab assignment. Slabs are anchored at absolute multiples of slab_height
// so maps built from different frames agree on layer boundaries. A point
// sitting exactly on a slab boundary is assigned to the slab below it
// (obstacle tops flush with a boundary must not spill one slab up); the
// world is assumed to live at z >= 0, so anything at or below z = 0 lands
// in the ground slab.

inline int slab_index_of_z(double z, double slab_height) {
  const int i = static_cast<int>(std::floor((z - kGeomTol) / slab_height));
  return std::max(i, 0);
}

inline std::vector<LayerSlab> compute_slabs(const std::vector<Point3>& points,
                                            double slab_height) {
  if (points.empty()) return {};
  double z_lo = points.front().z, z_hi = z_lo;
  for (const auto& p : points) {
    z_lo = std::min(z_lo, p.z);
    z_hi = std::max(z_hi, p.z);
  }
  const int i0 = slab_index_of_z(z_lo, slab_height);
  const int i1 = slab_index_of_z(z_hi, slab_height);
  std::vector<LayerSlab> slabs;
  for (int i = i0; i <= i1; ++i) {
    slabs.push_back(LayerSlab{static_cast<int>(slabs.size()), i * slab_height,
                              (i + 1) * slab_height});
  }
  return slabs;
}

// ---------------------------------------------------------------------------
// Slicing. All slabs share one grid frame: the cloud's XY bounding box,
// snapped to the resolution lattice (cross-frame cell alignment) and padded
// so later inflation never clips at the border.

inline OccupancyGrid2D make_grid_frame(const std::vector<Point3>& points, double resolution,
                                       int pad_cells) {
  double min_x = points.front().x, max_x = min_x;
  double min_y = points.front().y, max_y = min_y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double ox = (std::floor(min_x / resolution) - pad_cells) * resolution;
  const double oy = (std::floor(min_y / resolution) - pad_cells) * resolution;
  const int w = static_cast<int>(std::ceil((max_x - ox) / resolution)) + pad_cells + 1;
  const int h = static_cast<int>(std::ceil((max_y - oy) / resolution)) + pad_cells + 1;
  return OccupancyGrid2D::make(resolution, {ox, oy}, w, h);
}

inline std::vector<OccupancyGrid2D> slice_cloud(const std::vector<Point3>& points,
                                                const std::vector<LayerSlab>& slabs,
                                                double resolution, int pad_cells = 0) {
  std::vector<OccupancyGrid2D> grids;
  if (slabs.empty()) return grids;
  if (points.empty()) {
    grids.assign(slabs.size(), OccupancyGrid2D::make(resolution, {0.0, 0.0}, 1, 1));
    return grids;
  }
  const OccupancyGrid2D frame = make_grid_frame(points, resolution, pad_cells);
  grids.assign(slabs.size(), frame);
  const double z0 = slabs.front().z_min;
  const double h = slabs.front().height();
  for (const auto& p : points) {
    const int li = slab_index_of_z(p.z - z0, h);
    if (li >= static_cast<int>(slabs.size())) continue;
    if (p.z < slabs[li].z_min - kGeomTol || p.z > slabs[li].z_max + kGeomTol) continue;
    const int cx = static_cast<int>(std::floor((p.x - frame.origin.x) / resolution));
    const int cy = static_cast<int>(std::floor((p.y - frame.origin.y) / resolution));
    if (frame.in_bounds(cx, cy)) grids[li].set(cx, cy);
  }
  return grids;
}

// ---------------------------------------------------------------------------
// Inflation: morphological dilation by a disc measured between cell centers.

inline std::vector<std::pair<int, int>> disc_offsets(double radius, double resolution) {
  std::vector<std::pair<int, int>> offs;
  const int r = static_cast<int>(std::ceil(radius / resolution));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (std::hypot(dx, dy) * resolution <= radius + kGeomTol) offs.emplace_back(dx, dy);
    }
  }
  return offs;
}

inline OccupancyGrid2D inflate(const OccupancyGrid2D& grid, double radius) {
  if (radius <= 0.0) return grid;
  OccupancyGrid2D out = grid;
  const auto offs = disc_offsets(radius, grid.resolution);
  for (int cy = 0; cy < grid.height; ++cy) {
    for (int cx = 0; cx < grid.width; ++cx) {
      if (!grid.occupied(cx, cy)) continue;
      for (const auto& [dx, dy] : offs) {
        const int nx = cx + dx, ny = cy + dy;
        if (out.in_bounds(nx, ny)) out.set(nx, ny);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contour tracing. Boundary edges of occupied cells are walked with the
// occupied side on the left, which yields counter-clockwise outer contours
// and clockwise hole contours; holes are dropped. At saddle corners (two
// occupied cells meeting only diagonally) the walk takes the left turn, so
// each diagonal lobe closes as its own simple polygon — a merged boundary
// would have to visit the shared corner twice.

namespace detail {

// Directions: 0 = +x, 1 = +y, 2 = -x, 3 = -y.
inline constexpr int kDirDx[4] = {1, 0, -1, 0};
inline constexpr int kDirDy[4] = {0, 1, 0, -1};

struct ContourTracer {
  const OccupancyGrid2D& grid;
  // Edge flags per corner and direction; corners form a (w+1) x (h+1) lattice.
  std::vector<std::uint8_t> edge_used;

  explicit ContourTracer(const OccupancyGrid2D& g)
      : grid(g), edge_used(static_cast<std::size_t>(g.width + 1) * (g.height + 1) * 4, 0) {}

  std::size_t edge_slot(int cx, int cy, int dir) const {
    return (static_cast<std::size_t>(cy) * (grid.width + 1) + cx) * 4 + dir;
  }

  bool occ(int cx, int cy) const { return grid.occupied(cx, cy); }

  // Cell to the left of the directed lattice edge starting at corner (cx,cy).
  std::pair<int, int> left_cell(int cx, int cy, int dir) const {
    switch (dir) {
      case 0: return {cx, cy};          // +x: cell above the edge row
      case 1: return {cx - 1, cy};      // +y: cell to the west
      case 2: return {cx - 1, cy - 1};  // -x: cell below
      default: return {cx, cy - 1};     // -y: cell to the east
    }
  }
  std::pair<int, int> right_cell(int cx, int cy, int dir) const {
    switch (dir) {
      case 0: return {cx, cy - 1};
      case 1: return {cx, cy};
      case 2: return {cx - 1, cy};
      default: return {cx - 1, cy - 1};
    }
  }

  bool is_boundary_edge(int cx, int cy, int dir) const {
    const auto [lx, ly] = left_cell(cx, cy, dir);
    const auto [rx, ry] = right_cell(cx, cy, dir);
    return occ(lx, ly) && !occ(rx, ry);
  }

  // Walks one closed loop starting from the given boundary edge.
  std::vector<Point2> trace_loop(int cx, int cy, int dir) {
    std::vector<Point2> raw;
    const int sx = cx, sy = cy, sdir = dir;
    do {
      edge_used[edge_slot(cx, cy, dir)] = 1;
      raw.push_back(grid.cell_corner(cx, cy));
      cx += kDirDx[dir];
      cy += kDirDy[dir];
      // Turn preference at the next corner: left, straight, right, back.
      // Trying left first splits saddle corners into separate simple loops.
      int next = -1;
      for (int turn : {1, 0, 3, 2}) {
        const int cand = (dir + turn) % 4;
        if (is_boundary_edge(cx, cy, cand)) {
          next = cand;
          break;
        }
      }
      dir = next;
    } while (dir >= 0 && !(cx == sx && cy == sy && dir == sdir));
    return raw;
  }
};

inline std::vector<Point2> collapse_collinear(const std::vector<Point2>& loop) {
  std::vector<Point2> out;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& prev = loop[(i + n - 1) % n];
    const Point2& cur = loop[i];
    const Point2& next = loop[(i + 1) % n];
    if (std::abs((cur - prev).cross(next - cur)) > kGeomTol) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

inline std::vector<Polygon2D> extract_contours(const OccupancyGrid2D& grid) {
  std::vector<Polygon2D> polys;
  detail::ContourTracer tracer(grid);
  for (int cy = 0; cy < grid.height; ++cy) {
    for (int cx = 0; cx < grid.width; ++cx) {
      if (!grid.occupied(cx, cy)) continue;
      // South edge of an occupied cell with a free south neighbour starts a
      // loop travelling +x.
      if (grid.occupied(cx, cy - 1)) continue;
      if (tracer.edge_used[tracer.edge_slot(cx, cy, 0)]) continue;
      auto raw = tracer.trace_loop(cx, cy, 0);
      auto pts = detail::collapse_collinear(raw);
      if (pts.size() < 3) continue;
      if (polygon_signed_area(pts) <= 0.0) continue;  // hole contour
      polys.emplace_back(std::move(pts));
    }
  }
  return polys;
}

// ---------------------------------------------------------------------------
// Douglas-Peucker on a closed polyline.

namespace detail {

inline void dp_keep(const std::vector<Point2>& pts, std::size_t lo, std::size_t hi,
                    double epsilon, std::vector<std::uint8_t>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t worst_i = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (d > worst) {
      worst = d;
      worst_i = i;
    }
  }
  if (worst >= epsilon) {  // strict survive: deviation < epsilon is dropped
    keep[worst_i] = 1;
    dp_keep(pts, lo, worst_i, epsilon, keep);
    dp_keep(pts, worst_i, hi, epsilon, keep);
  }
}

inline bool proper_segments_cross(const Point2& a, const Point2& b, const Point2& c,
                                  const Point2& d) {
  const auto side = [](const Point2& p, const Point2& q, const Point2& r) {
    const double v = (q - p).cross(r - p);
    return v > kGeomTol ? 1 : (v < -kGeomTol ? -1 : 0);
  };
  const int s1 = side(a, b, c), s2 = side(a, b, d);
  const int s3 = side(c, d, a), s4 = side(c, d, b);
  return s1 * s2 < 0 && s3 * s4 < 0;
}

}  // namespace detail

// Pairwise proper-crossing scan over non-adjacent edges; O(k^2), fine at
// contour vertex counts.
inline bool polygon_is_simple(const std::vector<Point2>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (detail::proper_segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

inline Polygon2D simplify_polygon(const Polygon2D& poly, double epsilon) {
  const auto& in = poly.pts();
  const std::size_t n = in.size();
  if (epsilon <= 0.0 || n <= 3) return poly;

  // Anchor A: lexicographically smallest vertex; anchor B: farthest from A.
  std::size_t a = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (in[i].x < in[a].x || (in[i].x == in[a].x && in[i].y < in[a].y)) a = i;
  }
  std::vector<Point2> rot(n);
  for (std::size_t i = 0; i < n; ++i) rot[i] = in[(a + i) % n];
  std::size_t b = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (distance(rot[i], rot[0]) > distance(rot[b], rot[0])) b = i;
  }

  std::vector<std::uint8_t> keep(n, 0);
  keep[0] = keep[b] = 1;
  detail::dp_keep(rot, 0, b, epsilon, keep);
  // Second chain wraps: run on [b..n] with the closing vertex appended.
  std::vector<Point2> tail(rot.begin() + b, rot.end());
  tail.push_back(rot[0]);
  std::vector<std::uint8_t> keep_tail(tail.size(), 0);
  keep_tail.front() = keep_tail.back() = 1;
  detail::dp_keep(tail, 0, tail.size() - 1, epsilon, keep_tail);
  for (std::size_t i = 1; i + 1 < tail.size(); ++i) {
    if (keep_tail[i]) keep[b + i] = 1;
  }

  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(rot[i]);
  }
  if (out.size() < 3) {
    // Collapsed too far: keep the anchors plus the point farthest from the
    // A-B line so the result still spans an area.
    double worst = -1.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || i == b) continue;
      const double d = point_segment_distance(rot[i], rot[0], rot[b]);
      if (d > worst) {
        worst = d;
        worst_i = i;
      }
    }
    out.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 || i == b || i == worst_i) out.push_back(rot[i]);
    }
  }
  if (out.size() < 3 || !polygon_is_simple(out)) return poly;
  return Polygon2D(std::move(out));
}

// ---------------------------------------------------------------------------
// Vertical contour connection: each vertex links to its <= k nearest
// neighbours (2D distance) in the layer directly above, within radius.

inline PolyhedralMap connect_vertical_contours(LayeredPolygonMap base, int k, double radius) {
  PolyhedralMap map;
  map.base = std::move(base);

  // Vertices in layer-major, polygon-major, contour order; ids are indices.
  std::vector<std::vector<VertexId>> layer_vertices(map.base.layer_count());
  for (int li = 0; li < map.base.layer_count(); ++li) {
    const double z = map.base.slabs[li].mid_z();
    for (std::size_t pi = 0; pi < map.base.polygons[li].size(); ++pi) {
      for (const Point2& p : map.base.polygons[li][pi].pts()) {
        GraphVertex v;
        v.id = static_cast<VertexId>(map.vertices.size());
        v.position = {p.x, p.y, z};
        v.layer = li;
        v.polygon_id = static_cast<int>(pi);
        v.origin = VertexOrigin::extracted;
        layer_vertices[li].push_back(v.id);
        map.vertices.push_back(v);
      }
    }
  }

  // Uniform hash grid per upper layer, cell edge = radius, 3x3 probe.
  struct CellKey {
    std::int64_t x, y;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& c) const {
      return static_cast<std::size_t>(c.x * 73856093ll ^ c.y * 19349663ll);
    }
  };
  for (int li = 0; li + 1 < map.base.layer_count(); ++li) {
    const auto& upper = layer_vertices[li + 1];
    if (upper.empty()) continue;
    std::unordered_map<CellKey, std::vector<VertexId>, CellHash> buckets;
    const auto key_of = [&](const Point2& p) {
      return CellKey{static_cast<std::int64_t>(std::floor(p.x / radius)),
                     static_cast<std::int64_t>(std::floor(p.y / radius))};
    };
    for (VertexId id : upper) buckets[key_of(map.vertices[id].position.xy())].push_back(id);

    std::vector<std::pair<double, VertexId>> cand;
    for (VertexId vid : layer_vertices[li]) {
      const Point2 p = map.vertices[vid].position.xy();
      const CellKey c = key_of(p);
      cand.clear();
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = buckets.find(CellKey{c.x + dx, c.y + dy});
          if (it == buckets.end()) continue;
          for (VertexId uid : it->second) {
            const double d = distance(p, map.vertices[uid].position.xy());
            if (d <= radius + kGeomTol) cand.emplace_back(d, uid);
          }
        }
      }
      std::sort(cand.begin(), cand.end());
      const int take = std::min<int>(k, static_cast<int>(cand.size()));
      for (int i = 0; i < take; ++i) map.vertical_edges.emplace_back(vid, cand[i].second);
    }
  }
  map.finalize();
  return map;
}

// ---------------------------------------------------------------------------
// Full pipeline.

inline LayeredPolygonMap build_layered_map(const std::vector<Point3>& points,
                                           const NavConfig& config) {
  LayeredPolygonMap out;
  out.resolution = config.resolution;
  out.inflation_radius = config.inflation_radius;
  out.slabs = compute_slabs(points, config.slab_height);
  out.polygons.assign(out.slabs.size(), {});
  if (out.slabs.empty()) return out;

  const int pad = static_cast<int>(std::ceil(config.inflation_radius / config.resolution)) + 2;
  const auto grids = slice_cloud(points, out.slabs, config.resolution, pad);
  const double eps = config.effective_simplify_epsilon();
  // Layers are independent; results land in per-layer slots, so the merge
  // order (and thus the map) matches a sequential run.
  parallel_for(out.slabs.size(), [&](std::size_t li) {
    const OccupancyGrid2D inflated = inflate(grids[li], config.inflation_radius);
    auto contours = extract_contours(inflated);
    std::vector<Polygon2D> simplified;
    simplified.reserve(contours.size());
    for (const auto& poly : contours) simplified.push_back(simplify_polygon(poly, eps));
    out.polygons[li] = std::move(simplified);
  });
  return out;
}

inline PolyhedralMap build_polyhedral_map(const std::vector<Point3>& points,
                                          const NavConfig& config) {
  config.validate();
  LayeredPolygonMap base = build_layered_map(points, config);
  return connect_vertical_contours(std::move(base), config.knn_k,
                                   config.effective_knn_radius());
}

}  // namespace visnav
