#pragma once

// Shared helpers for the test suites: canonical configs, box clouds, and a
// few brute-force oracles that deliberately avoid the code paths under test.

#include <visnav/config.hpp>
#include <visnav/extraction.hpp>
#include <visnav/geometry.hpp>
#include <visnav/map.hpp>
#include <visnav/scene.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace visnav::test {

inline NavConfig default_config() {
    NavConfig cfg;
    cfg.validate();
    return cfg;
}

// Dense surface samples of one axis-aligned box, spaced well below the map
// resolution so every boundary voxel of the footprint gets hit.
inline std::vector<Point3> box_cloud(double cx, double cy, double hx, double hy,
                                     double height, double spacing = 0.15,
                                     double z0 = 0.0) {
    Scene scene;
    scene.name = "box";
    scene.bounds_min = {cx - hx - 5.0, cy - hy - 5.0, 0.0};
    scene.bounds_max = {cx + hx + 5.0, cy + hy + 5.0, z0 + height + 2.0};
    scene.obstacles.push_back({make_box(cx, cy, hx, hy), z0, z0 + height});
    return surface_cloud(scene, spacing);
}

inline PolyhedralMap map_from_cloud(const std::vector<Point3>& cloud,
                                    const NavConfig& cfg) {
    return build_polyhedral_map(cloud, cfg);
}

// Brute segment/segment intersection used as the oracle for the clipping
// helpers. Returns parameters along (a, b) where the segment meets (c, d),
// including both ends of any collinear overlap.
inline std::vector<double> brute_segment_params(const Point2& a, const Point2& b,
                                                const Point2& c, const Point2& d) {
    std::vector<double> out;
    const double rx = b.x - a.x, ry = b.y - a.y;
    const double sx = d.x - c.x, sy = d.y - c.y;
    const double denom = rx * sy - ry * sx;
    const double qpx = c.x - a.x, qpy = c.y - a.y;
    const double cross_qp_s = qpx * sy - qpy * sx;
    const double cross_qp_r = qpx * ry - qpy * rx;
    const double eps = 1e-12;
    if (std::abs(denom) > eps) {
        const double t = cross_qp_s / denom;
        const double u = cross_qp_r / denom;
        if (t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps) {
            out.push_back(std::clamp(t, 0.0, 1.0));
        }
        return out;
    }
    if (std::abs(cross_qp_r) > eps) return out;  // parallel, not collinear
    const double rr = rx * rx + ry * ry;
    if (rr < eps) return out;
    double t0 = (qpx * rx + qpy * ry) / rr;
    double t1 = t0 + (sx * rx + sy * ry) / rr;
    if (t0 > t1) std::swap(t0, t1);
    t0 = std::max(0.0, t0);
    t1 = std::min(1.0, t1);
    if (t0 <= t1 + eps) {
        out.push_back(std::clamp(t0, 0.0, 1.0));
        out.push_back(std::clamp(t1, 0.0, 1.0));
    }
    return out;
}

// Crossing-number point-in-polygon, written independently of the library's
// winding test.
inline bool brute_point_in_polygon(const Point2& p, const std::vector<Point2>& v) {
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        const bool straddles = (v[i].y > p.y) != (v[j].y > p.y);
        if (straddles) {
            const double x_at =
                v[j].x + (p.y - v[j].y) / (v[i].y - v[j].y) * (v[i].x - v[j].x);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

}  // namespace visnav::test
