#pragma once

// Incremental global visibility graph: frame-by-frame merge of local
// graphs with mutual-nearest correspondence, absence counting and edge
// re-validation against the current global map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "visnav/config.hpp"
#include "visnav/map.hpp"
#include "visnav/vgraph.hpp"

namespace visnav {

struct GlobalGraph {
  VisibilityGraph graph;
  std::vector<int> absence;  // frames-unseen per vertex, parallel to graph.vertices
  std::int64_t frame_index = 0;
};

namespace detail {

// Spatial hash over global vertices, cell size = match tolerance, so that
// candidate lookup probes a fixed 3x3x3 neighborhood.
struct MatchGrid {
  double cell = 1.0;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> buckets;

  static std::int64_t key(int x, int y, int z) {
    return (static_cast<std::int64_t>(x) * 73856093) ^
           (static_cast<std::int64_t>(y) * 19349663) ^
           (static_cast<std::int64_t>(z) * 83492791);
  }
  void build(const std::vector<GraphVertex>& vs, double tolerance) {
    cell = std::max(tolerance, 1e-6);
    buckets.clear();
    for (const auto& v : vs) {
      const int x = static_cast<int>(std::floor(v.position.x / cell));
      const int y = static_cast<int>(std::floor(v.position.y / cell));
      const int z = static_cast<int>(std::floor(v.position.z / cell));
      buckets[key(x, y, z)].push_back(v.id);
    }
  }
  template <typename Fn>
  void for_candidates(const Point3& p, Fn&& fn) const {
    const int cx = static_cast<int>(std::floor(p.x / cell));
    const int cy = static_cast<int>(std::floor(p.y / cell));
    const int cz = static_cast<int>(std::floor(p.z / cell));
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const auto it = buckets.find(key(cx + dx, cy + dy, cz + dz));
          if (it == buckets.end()) continue;
          for (std::int32_t id : it->second) fn(id);
        }
      }
    }
  }
};

inline bool in_extent(const Point3& p, const Point3& robot, double extent) {
  const double half = extent * 0.5;
  return std::abs(p.x - robot.x) <= half && std::abs(p.y - robot.y) <= half;
}

}  // namespace detail

// Merges one local graph into the global one. `map` is the polyhedral map
// built from everything observed so far; every surviving edge is
// re-checked against it so the global graph never carries a stale edge
// through geometry that has since filled in.
//
// disappear_frames (M): a global vertex inside the local window that finds
// no local correspondent M frames in a row is dropped.
inline GlobalGraph merge_local(const GlobalGraph& global, const VisibilityGraph& local,
                               const Point3& robot_pose, double extent,
                               const PolyhedralMap& map, const NavConfig& config) {
  const double tol = config.correspondence_tolerance();
  const auto& gv = global.graph.vertices;
  const auto& lv = local.vertices;

  // Only global vertices inside the local window participate in matching:
  // vertices beyond it are never modified (or aged) by a merge.
  std::vector<std::uint8_t> in_ext(gv.size(), 0);
  for (std::size_t gi = 0; gi < gv.size(); ++gi) {
    in_ext[gi] = detail::in_extent(gv[gi].position, robot_pose, extent) ? 1 : 0;
  }

  detail::MatchGrid grid;
  grid.build(gv, tol);

  // Mutual nearest neighbor matching, ties broken by lowest id.
  std::vector<std::int32_t> best_g_for_l(lv.size(), kInvalidVertex);
  for (std::size_t li = 0; li < lv.size(); ++li) {
    double best = tol;
    std::int32_t best_id = kInvalidVertex;
    grid.for_candidates(lv[li].position, [&](std::int32_t gid) {
      if (!in_ext[gid]) return;
      const double d = distance(lv[li].position, gv[gid].position);
      if (d < best - kGeomTol || (d <= best + kGeomTol && (best_id < 0 || gid < best_id))) {
        if (d <= tol + kGeomTol) {
          best = d;
          best_id = gid;
        }
      }
    });
    best_g_for_l[li] = best_id;
  }
  std::vector<std::int32_t> best_l_for_g(gv.size(), kInvalidVertex);
  {
    detail::MatchGrid lgrid;
    lgrid.build(lv, tol);
    for (std::size_t gi = 0; gi < gv.size(); ++gi) {
      if (!in_ext[gi]) continue;
      double best = tol;
      std::int32_t best_id = kInvalidVertex;
      lgrid.for_candidates(gv[gi].position, [&](std::int32_t lid) {
        const double d = distance(gv[gi].position, lv[lid].position);
        if (d < best - kGeomTol || (d <= best + kGeomTol && (best_id < 0 || lid < best_id))) {
          if (d <= tol + kGeomTol) {
            best = d;
            best_id = lid;
          }
        }
      });
      best_l_for_g[gi] = best_id;
    }
  }

  // local id -> id in the next global graph (dense ids assigned below).
  std::vector<std::int32_t> local_to_next(lv.size(), kInvalidVertex);
  std::vector<std::int32_t> matched_local_for_g(gv.size(), kInvalidVertex);
  for (std::size_t li = 0; li < lv.size(); ++li) {
    const std::int32_t g = best_g_for_l[li];
    if (g >= 0 && best_l_for_g[g] == static_cast<std::int32_t>(li)) {
      matched_local_for_g[g] = static_cast<std::int32_t>(li);
    }
  }

  GlobalGraph next;
  next.frame_index = global.frame_index + 1;
  std::vector<std::int32_t> global_to_next(gv.size(), kInvalidVertex);

  // Surviving global vertices keep their relative order; matched ones take
  // the local observation's position and layer.
  for (std::size_t gi = 0; gi < gv.size(); ++gi) {
    const std::int32_t li = matched_local_for_g[gi];
    int new_absence = 0;
    GraphVertex v = gv[gi];
    if (li >= 0) {
      v.position = lv[li].position;
      v.layer = lv[li].layer;
      v.origin = lv[li].origin;
    } else if (detail::in_extent(v.position, robot_pose, extent)) {
      new_absence = global.absence[gi] + 1;
      if (new_absence >= config.disappear_frames) continue;  // dropped
    } else {
      new_absence = global.absence[gi];  // out of view: frozen
    }
    const std::int32_t nid = static_cast<std::int32_t>(next.graph.vertices.size());
    global_to_next[gi] = nid;
    v.id = nid;
    next.graph.vertices.push_back(v);
    next.absence.push_back(new_absence);
    if (li >= 0) local_to_next[li] = nid;
  }
  // Unmatched local vertices are appended in local id order.
  for (std::size_t li = 0; li < lv.size(); ++li) {
    if (local_to_next[li] >= 0) continue;
    GraphVertex v = lv[li];
    v.id = static_cast<std::int32_t>(next.graph.vertices.size());
    local_to_next[li] = v.id;
    next.graph.vertices.push_back(v);
    next.absence.push_back(0);
  }

  // Union of remapped edges; recomputed weights (matched vertices may have
  // moved) and a full visibility re-check against the current map.
  std::vector<GraphEdge> edges;
  edges.reserve(global.graph.edges.size() + local.edges.size());
  const auto push_edge = [&](std::int32_t a, std::int32_t b, EdgeKind kind) {
    if (a < 0 || b < 0 || a == b) return;
    const auto& pa = next.graph.vertices[a].position;
    const auto& pb = next.graph.vertices[b].position;
    if (!check_visibility({pa, pb}, map)) return;
    edges.push_back({a, b, distance(pa, pb), kind});
  };
  for (const auto& e : global.graph.edges) {
    push_edge(global_to_next[e.a], global_to_next[e.b], e.kind);
  }
  for (const auto& e : local.edges) {
    push_edge(local_to_next[e.a], local_to_next[e.b], e.kind);
  }
  detail::sort_dedupe_edges(edges);
  next.graph.edges = std::move(edges);
  next.graph.rebuild_adjacency();
  return next;
}

}  // namespace visnav
