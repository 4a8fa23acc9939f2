#pragma once

// 2D/3D geometric primitives shared by every other component: polygon
// containment, segment clipping against horizontal slabs, and
// segment/polygon intersection. Everything here is a pure function over
// value types and safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace visnav {

// Position tolerance in meters for dedup and on-boundary tests.
inline constexpr double kGeomTol = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Point2& o) const { return x * o.x + y * o.y; }
  double cross(const Point2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Point2& o) const = default;
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Point2 xy() const { return {x, y}; }
  bool operator==(const Point3& o) const = default;
};

inline double distance(const Point3& a, const Point3& b) { return (a - b).norm(); }

inline Point3 lerp(const Point3& a, const Point3& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t};
}

struct Segment2 {
  Point2 a;
  Point2 b;
  Point2 at(double t) const { return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}; }
  double length() const { return distance(a, b); }
};

struct Segment3 {
  Point3 a;
  Point3 b;
  Point3 at(double t) const { return lerp(a, b, t); }
  double length() const { return distance(a, b); }
};

// Horizontal slab [z_min, z_max]. Slabs of a map are contiguous and
// ascending; boundaries are shared, so a point at a boundary z belongs to
// both neighbours (the conservative reading for collision checks).
struct LayerSlab {
  int index = 0;
  double z_min = 0.0;
  double z_max = 0.0;

  double mid_z() const { return 0.5 * (z_min + z_max); }
  double height() const { return z_max - z_min; }
  bool contains_z(double z, double tol = 0.0) const { return z >= z_min - tol && z <= z_max + tol; }
};

struct Aabb2 {
  Point2 min{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point2 max{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  void expand(const Point2& p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }
  bool empty() const { return min.x > max.x; }
  bool contains(const Point2& p, double tol = 0.0) const {
    return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol && p.y <= max.y + tol;
  }
  bool overlaps(const Aabb2& o, double tol = 0.0) const {
    return min.x <= o.max.x + tol && o.min.x <= max.x + tol && min.y <= o.max.y + tol &&
           o.min.y <= max.y + tol;
  }
};

inline double polygon_signed_area(const std::vector<Point2>& pts) {
  double acc = 0.0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const Point2& p = pts[i];
    const Point2& q = pts[(i + 1) % n];
    acc += p.cross(q);
  }
  return 0.5 * acc;
}

// Simple closed polygon, counter-clockwise, at least 3 vertices, no two
// consecutive vertices closer than kGeomTol. Orientation is normalized at
// construction.
class Polygon2D {
 public:
  Polygon2D() = default;

  explicit Polygon2D(std::vector<Point2> pts) : pts_(std::move(pts)) {
    if (pts_.size() < 3) throw std::invalid_argument("Polygon2D: needs at least 3 vertices");
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (distance(pts_[i], pts_[(i + 1) % pts_.size()]) <= kGeomTol) {
        throw std::invalid_argument("Polygon2D: consecutive duplicate vertex");
      }
    }
    if (polygon_signed_area(pts_) < 0.0) std::reverse(pts_.begin(), pts_.end());
    for (const Point2& p : pts_) bbox_.expand(p);
  }

  const std::vector<Point2>& pts() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  const Aabb2& bbox() const { return bbox_; }
  double area() const { return polygon_signed_area(pts_); }

 private:
  std::vector<Point2> pts_;
  Aabb2 bbox_;
};

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 <= kGeomTol * kGeomTol) return distance(p, a);
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

inline double polygon_boundary_distance(const Point2& p, const Polygon2D& poly) {
  double best = std::numeric_limits<double>::max();
  const auto& pts = poly.pts();
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    best = std::min(best, point_segment_distance(p, pts[i], pts[(i + 1) % n]));
  }
  return best;
}

// Even-odd crossing parity; does not handle points on the boundary, use
// point_in_polygon / point_strictly_inside for those.
inline bool crossing_parity_inside(const Point2& p, const Polygon2D& poly) {
  bool inside = false;
  const auto& pts = poly.pts();
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

// Obstacles are closed sets: the boundary counts as inside.
inline bool point_in_polygon(const Point2& p, const Polygon2D& poly) {
  if (!poly.bbox().contains(p, kGeomTol)) return false;
  if (polygon_boundary_distance(p, poly) <= kGeomTol) return true;
  return crossing_parity_inside(p, poly);
}

// Interior test with a clearance margin; boundary contact does not count.
inline bool point_strictly_inside(const Point2& p, const Polygon2D& poly,
                                  double margin = kGeomTol) {
  if (!poly.bbox().contains(p)) return false;
  if (polygon_boundary_distance(p, poly) <= margin) return false;
  return crossing_parity_inside(p, poly);
}

namespace detail {

// Parameters t along seg where it meets the boundary of poly, including
// tangential touches; collinear overlaps contribute their entry/exit
// parameters. Unsorted, may contain near-duplicates.
inline void collect_boundary_params(const Segment2& seg, const Polygon2D& poly,
                                    std::vector<double>& out) {
  const Point2 d1 = seg.b - seg.a;
  const double len1 = d1.norm();
  const auto& pts = poly.pts();
  const bool degenerate = len1 <= kGeomTol;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const Point2& p = pts[i];
    const Point2& q = pts[(i + 1) % n];
    if (degenerate) {
      if (point_segment_distance(seg.a, p, q) <= kGeomTol) out.push_back(0.0);
      continue;
    }
    const Point2 d2 = q - p;
    const double len2 = d2.norm();
    const double denom = d1.cross(d2);
    const Point2 ap = p - seg.a;
    if (std::abs(denom) > 1e-12 * len1 * len2) {
      const double t = ap.cross(d2) / denom;
      const double u = ap.cross(d1) / denom;
      const double t_tol = kGeomTol / len1;
      const double u_tol = kGeomTol / len2;
      if (t >= -t_tol && t <= 1.0 + t_tol && u >= -u_tol && u <= 1.0 + u_tol) {
        out.push_back(std::clamp(t, 0.0, 1.0));
      }
    } else if (std::abs(ap.cross(d1)) <= kGeomTol * len1) {
      // Collinear edge: project its endpoints onto seg.
      const double inv = 1.0 / d1.dot(d1);
      double t0 = (p - seg.a).dot(d1) * inv;
      double t1 = (q - seg.a).dot(d1) * inv;
      if (t0 > t1) std::swap(t0, t1);
      t0 = std::max(t0, 0.0);
      t1 = std::min(t1, 1.0);
      if (t0 <= t1) {
        out.push_back(t0);
        out.push_back(t1);
      }
    }
  }
}

}  // namespace detail

// All points where seg crosses or touches the polygon boundary, ordered by
// parameter along seg, deduplicated within kGeomTol meters.
inline std::vector<Point2> segment_polygon_intersections(const Segment2& seg,
                                                         const Polygon2D& poly) {
  std::vector<double> params;
  detail::collect_boundary_params(seg, poly, params);
  std::sort(params.begin(), params.end());
  std::vector<Point2> out;
  for (double t : params) {
    const Point2 p = seg.at(t);
    if (out.empty() || distance(out.back(), p) > kGeomTol) out.push_back(p);
  }
  return out;
}

// Maximal sub-segment of seg with z in [slab.z_min, slab.z_max], as
// parameters along seg. Horizontal segments inside the slab clip to the
// whole range.
inline std::optional<std::pair<double, double>> clip_params_to_slab(const Segment3& seg,
                                                                    const LayerSlab& slab) {
  const double za = seg.a.z;
  const double zb = seg.b.z;
  const double dz = zb - za;
  if (std::abs(dz) <= kGeomTol) {
    if (za < slab.z_min || za > slab.z_max) return std::nullopt;
    return std::make_pair(0.0, 1.0);
  }
  double t0 = (slab.z_min - za) / dz;
  double t1 = (slab.z_max - za) / dz;
  if (t0 > t1) std::swap(t0, t1);
  t0 = std::max(t0, 0.0);
  t1 = std::min(t1, 1.0);
  if (t0 > t1) return std::nullopt;
  return std::make_pair(t0, t1);
}

inline std::optional<Segment3> clip_segment_to_slab(const Segment3& seg, const LayerSlab& slab) {
  const auto params = clip_params_to_slab(seg, slab);
  if (!params) return std::nullopt;
  return Segment3{seg.at(params->first), seg.at(params->second)};
}

// True when some point of seg lies strictly inside poly. Boundary contact
// (endpoints on contours, chords running along a face, tangential touches)
// does not block; any penetration of the open interior does. Decided by
// splitting seg at every boundary contact and classifying the midpoint of
// each piece.
inline bool segment_enters_polygon(const Segment2& seg, const Polygon2D& poly) {
  Aabb2 seg_box;
  seg_box.expand(seg.a);
  seg_box.expand(seg.b);
  if (!seg_box.overlaps(poly.bbox(), kGeomTol)) return false;
  if (seg.length() <= kGeomTol) return point_strictly_inside(seg.a, poly);

  std::vector<double> params;
  params.push_back(0.0);
  params.push_back(1.0);
  detail::collect_boundary_params(seg, poly, params);
  std::sort(params.begin(), params.end());
  for (std::size_t i = 0; i + 1 < params.size(); ++i) {
    const double mid = 0.5 * (params[i] + params[i + 1]);
    if (mid <= 0.0 || mid >= 1.0) continue;
    if (point_strictly_inside(seg.at(mid), poly)) return true;
  }
  return false;
}

}  // namespace visnav
