#pragma once

// Vertex-domain Dijkstra plus the iterative divide-and-conquer refinement:
// odd/even waypoint splitting, top-contour intersection, fly-over insert
// points and re-search on the combined graph.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "visnav/config.hpp"
#include "visnav/geometry.hpp"
#include "visnav/map.hpp"
#include "visnav/vgraph.hpp"

namespace visnav {

struct TerminalInCollisionError : std::runtime_error {
  explicit TerminalInCollisionError(const char* which)
      : std::runtime_error(std::string("terminal-in-collision: ") + which) {}
};

struct Path {
  std::vector<Point3> waypoints;
  double length = 0.0;

  static Path from_points(std::vector<Point3> pts) {
    Path p;
    p.waypoints = std::move(pts);
    for (std::size_t i = 1; i < p.waypoints.size(); ++i) {
      p.length += distance(p.waypoints[i - 1], p.waypoints[i]);
    }
    return p;
  }
};

struct RefineState {
  Path current;
  std::vector<GraphVertex> inserted;  // accepted fly-over points, accumulated
  int iteration = 0;
  int division_depth = 0;
  bool converged = false;
};

// ---------------------------------------------------------------------------
// Query overlay: the immutable base graph plus temporary vertices
// (terminals, refinement inserts) connected by exhaustively validated
// edges. Avoids copying the base graph per query.

class QueryGraph {
 public:
  QueryGraph(const VisibilityGraph& base, const PolyhedralMap& map)
      : base_(&base), map_(&map) {
    if (base.adj.size() != base.vertices.size()) {
      own_adj_.assign(base.vertices.size(), {});
      for (const auto& e : base.edges) {
        own_adj_[e.a].emplace_back(e.b, e.weight);
        own_adj_[e.b].emplace_back(e.a, e.weight);
      }
      for (auto& nbrs : own_adj_) std::sort(nbrs.begin(), nbrs.end());
      adj_ = &own_adj_;
    } else {
      adj_ = &base.adj;
    }
  }

  VertexId base_size() const { return static_cast<VertexId>(base_->vertices.size()); }
  VertexId size() const { return base_size() + static_cast<VertexId>(extra_.size()); }
  const PolyhedralMap& map() const { return *map_; }

  const Point3& position(VertexId id) const {
    return id < base_size() ? base_->vertices[id].position
                            : extra_[id - base_size()].position;
  }

  // Adds a temporary vertex connected against every base vertex and every
  // previously added extra vertex (all edges pass check_visibility).
  VertexId add_point(const Point3& p) {
    const VertexId id = size();
    GraphVertex v;
    v.id = id;
    v.position = p;
    v.layer = std::clamp(map_->base.layer_of_z(p.z), 0,
                         std::max(0, map_->layer_count() - 1));
    v.polygon_id = -1;
    v.origin = VertexOrigin::sampled;

    std::vector<std::pair<VertexId, double>> links;
    for (VertexId w : connect_point_exhaustive(*map_, base_->vertices, p)) {
      links.emplace_back(w, distance(p, base_->vertices[w].position));
    }
    for (std::size_t i = 0; i < extra_.size(); ++i) {
      if (check_visibility({p, extra_[i].position}, *map_)) {
        links.emplace_back(base_size() + static_cast<VertexId>(i),
                           distance(p, extra_[i].position));
      }
    }
    extra_.push_back(v);
    extra_adj_.push_back(links);
    for (const auto& [w, d] : links) {
      if (w < base_size()) {
        base_patch_[w].emplace_back(id, d);
      } else {
        extra_adj_[w - base_size()].emplace_back(id, d);
      }
    }
    return id;
  }

  template <typename F>
  void for_each_neighbor(VertexId u, F&& f) const {
    if (u < base_size()) {
      for (const auto& [v, w] : (*adj_)[u]) f(v, w);
      const auto it = base_patch_.find(u);
      if (it != base_patch_.end()) {
        for (const auto& [v, w] : it->second) f(v, w);
      }
    } else {
      for (const auto& [v, w] : extra_adj_[u - base_size()]) f(v, w);
    }
  }

  struct SearchTree {
    std::vector<double> dist;
    std::vector<VertexId> pred;
    std::vector<std::int32_t> hops;
    bool reached(VertexId v) const { return dist[v] < std::numeric_limits<double>::max(); }
  };

  // Deterministic Dijkstra: ties on distance fall to fewer hops, then to
  // the smaller predecessor id.
  SearchTree search(VertexId start) const {
    const std::size_t n = static_cast<std::size_t>(size());
    SearchTree t;
    t.dist.assign(n, std::numeric_limits<double>::max());
    t.pred.assign(n, kInvalidVertex);
    t.hops.assign(n, 0);
    std::vector<std::uint8_t> done(n, 0);
    using Entry = std::tuple<double, std::int32_t, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    t.dist[start] = 0.0;
    heap.emplace(0.0, 0, start);
    while (!heap.empty()) {
      const auto [d, h, u] = heap.top();
      heap.pop();
      if (done[u] || d != t.dist[u] || h != t.hops[u]) continue;
      done[u] = 1;
      for_each_neighbor(u, [&](VertexId v, double w) {
        if (done[v]) return;
        const double nd = d + w;
        const std::int32_t nh = h + 1;
        const bool better = nd < t.dist[v] ||
                            (nd == t.dist[v] &&
                             (nh < t.hops[v] || (nh == t.hops[v] && u < t.pred[v])));
        if (better) {
          t.dist[v] = nd;
          t.hops[v] = nh;
          t.pred[v] = u;
          heap.emplace(nd, nh, v);
        }
      });
    }
    return t;
  }

  std::optional<Path> shortest_path(VertexId start, VertexId goal) const {
    const SearchTree t = search(start);
    return extract_path(t, start, goal);
  }

  std::optional<Path> extract_path(const SearchTree& t, VertexId start, VertexId goal) const {
    if (!t.reached(goal)) return std::nullopt;
    std::vector<Point3> rev;
    for (VertexId v = goal; v != start; v = t.pred[v]) rev.push_back(position(v));
    rev.push_back(position(start));
    std::reverse(rev.begin(), rev.end());
    Path p;
    p.waypoints = std::move(rev);
    p.length = t.dist[goal];
    return p;
  }

 private:
  const VisibilityGraph* base_;
  const PolyhedralMap* map_;
  const std::vector<std::vector<std::pair<VertexId, double>>>* adj_ = nullptr;
  std::vector<std::vector<std::pair<VertexId, double>>> own_adj_;
  std::vector<GraphVertex> extra_;
  std::vector<std::vector<std::pair<VertexId, double>>> extra_adj_;
  std::unordered_map<VertexId, std::vector<std::pair<VertexId, double>>> base_patch_;
};

// ---------------------------------------------------------------------------
// Spec-shaped entry points.

inline VisibilityGraph attach_terminals(const VisibilityGraph& graph, const PolyhedralMap& map,
                                        const Point3& p_robot, const Point3& p_goal) {
  if (point_strictly_in_layered_obstacle(map, p_robot)) {
    throw TerminalInCollisionError("robot");
  }
  if (point_strictly_in_layered_obstacle(map, p_goal)) {
    throw TerminalInCollisionError("goal");
  }
  VisibilityGraph out = graph;
  const auto add = [&](const Point3& p) {
    GraphVertex v;
    v.id = static_cast<VertexId>(out.vertices.size());
    v.position = p;
    v.layer = std::clamp(map.base.layer_of_z(p.z), 0, std::max(0, map.layer_count() - 1));
    v.polygon_id = -1;
    v.origin = VertexOrigin::sampled;
    for (VertexId w : connect_point_exhaustive(map, out.vertices, p)) {
      out.edges.push_back({w, v.id, distance(p, out.vertices[w].position), EdgeKind::sampled});
    }
    out.vertices.push_back(v);
    return v.id;
  };
  add(p_robot);
  add(p_goal);  // sees the robot vertex too: direct terminal edge included
  detail::sort_dedupe_edges(out.edges);
  out.rebuild_adjacency();
  return out;
}

inline std::optional<Path> dijkstra(const VisibilityGraph& graph, VertexId start_id,
                                    VertexId goal_id) {
  // Map can be empty here: QueryGraph only needs it for add_point.
  static const PolyhedralMap kEmptyMap{};
  QueryGraph qg(graph, kEmptyMap);
  return qg.shortest_path(start_id, goal_id);
}

// ---------------------------------------------------------------------------
// Divide: odd/even waypoint splitting and top-contour intersection.

namespace detail {

// Per-polygon vertex lists plus lazy column-top lookup (the highest layer
// reachable from a polygon through vertical contour edges).
struct TopIndex {
  const PolyhedralMap* map;
  std::vector<std::vector<std::vector<VertexId>>> poly_vertices;  // [layer][poly]
  std::vector<std::pair<int, int>> top_polys;                     // (layer, poly)
  mutable std::unordered_map<std::int64_t, int> column_top_cache;

  explicit TopIndex(const PolyhedralMap& m) : map(&m) {
    poly_vertices.resize(m.base.layer_count());
    for (int li = 0; li < m.base.layer_count(); ++li) {
      poly_vertices[li].resize(m.base.polygons[li].size());
    }
    for (const auto& v : m.vertices) {
      if (v.polygon_id >= 0) poly_vertices[v.layer][v.polygon_id].push_back(v.id);
    }
    for (int li = 0; li < m.base.layer_count(); ++li) {
      for (std::size_t pi = 0; pi < poly_vertices[li].size(); ++pi) {
        for (VertexId vid : poly_vertices[li][pi]) {
          if (m.top_layer_mark[vid]) {
            top_polys.emplace_back(li, static_cast<int>(pi));
            break;
          }
        }
      }
    }
  }

  static std::int64_t key(int li, int pi) { return (static_cast<std::int64_t>(li) << 32) | pi; }

  int column_top(int li, int pi) const {
    const auto it = column_top_cache.find(key(li, pi));
    if (it != column_top_cache.end()) return it->second;
    int top = li;
    std::vector<std::pair<int, int>> stack{{li, pi}};
    std::unordered_map<std::int64_t, bool> seen{{key(li, pi), true}};
    while (!stack.empty()) {
      const auto [cl, cp] = stack.back();
      stack.pop_back();
      top = std::max(top, cl);
      for (VertexId vid : poly_vertices[cl][cp]) {
        for (VertexId up : map->vertical_neighbors_up(vid)) {
          const auto& uv = map->vertices[up];
          if (uv.polygon_id < 0) continue;
          if (seen.emplace(key(uv.layer, uv.polygon_id), true).second) {
            stack.emplace_back(uv.layer, uv.polygon_id);
          }
        }
      }
    }
    column_top_cache[key(li, pi)] = top;
    return top;
  }
};

}  // namespace detail

// Expands the path's odd/even subset queue and returns the accepted lifted
// insert candidates. depth_out (optional) reports the division depth used.
inline std::vector<GraphVertex> divide_and_insert(
    const Path& path, const PolyhedralMap& map, double budget_ms,
    double max_altitude = std::numeric_limits<double>::infinity(), int* depth_out = nullptr) {
  std::vector<GraphVertex> inserts;
  if (depth_out) *depth_out = 0;
  if (path.waypoints.size() <= 2 || map.empty()) return inserts;

  detail::TopIndex index(map);
  if (index.top_polys.empty()) return inserts;
  const double slab_h = map.base.slab_height();
  const auto t0 = std::chrono::steady_clock::now();
  const auto out_of_budget = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count() >= budget_ms;
  };

  const auto try_candidate = [&](const Point3& a, const Point3& b, double t, int li, int pi) {
    const Point3 on_seg = lerp(a, b, t);
    const int top = index.column_top(li, pi);
    const double lift_z = map.base.slabs[top].z_max + 0.5 * slab_h;
    if (on_seg.z >= lift_z - kGeomTol) return;  // segment already clears the column
    if (lift_z > max_altitude) return;
    const Point3 cand{on_seg.x, on_seg.y, lift_z};
    if (point_strictly_in_layered_obstacle(map, cand)) return;
    for (const auto& prev : inserts) {
      if (distance(prev.position, cand) <= 1e-9) return;
    }
    GraphVertex v;
    v.id = kInvalidVertex;
    v.position = cand;
    v.layer = std::clamp(map.base.layer_of_z(cand.z), 0, std::max(0, map.layer_count() - 1));
    v.polygon_id = -1;
    v.origin = VertexOrigin::sampled;
    inserts.push_back(v);
  };

  const auto process_pair = [&](const Point3& a, const Point3& b) {
    const Segment2 proj{a.xy(), b.xy()};
    if (proj.length() <= kGeomTol) return;
    for (const auto& [li, pi] : index.top_polys) {
      const Polygon2D& poly = map.base.polygons[li][pi];
      std::vector<double> params;
      detail::collect_boundary_params(proj, poly, params);
      std::sort(params.begin(), params.end());
      Point2 last{std::numeric_limits<double>::max(), 0.0};
      for (double t : params) {
        const Point2 pt = proj.at(t);
        if (distance(pt, last) <= 1e-9) continue;
        last = pt;
        try_candidate(a, b, t, li, pi);
      }
    }
  };

  struct Subset {
    std::vector<std::size_t> idx;
    int depth = 0;
  };
  std::vector<Subset> queue;
  {
    Subset all;
    all.idx.resize(path.waypoints.size());
    for (std::size_t i = 0; i < all.idx.size(); ++i) all.idx[i] = i;
    queue.push_back(std::move(all));
  }
  for (std::size_t head = 0; head < queue.size() && !out_of_budget(); ++head) {
    const Subset sub = queue[head];
    const std::size_t interior = sub.idx.size() >= 2 ? sub.idx.size() - 2 : 0;
    if (interior == 0) continue;
    if (depth_out) *depth_out = std::max(*depth_out, sub.depth + 1);
    // Terminals stay in both halves; interior waypoints split by parity.
    Subset odd, even;
    odd.depth = even.depth = sub.depth + 1;
    odd.idx.push_back(sub.idx.front());
    even.idx.push_back(sub.idx.front());
    for (std::size_t k = 1; k + 1 < sub.idx.size(); ++k) {
      (k % 2 == 1 ? odd : even).idx.push_back(sub.idx[k]);
    }
    odd.idx.push_back(sub.idx.back());
    even.idx.push_back(sub.idx.back());
    for (const Subset* s : {&odd, &even}) {
      for (std::size_t k = 0; k + 1 < s->idx.size(); ++k) {
        process_pair(path.waypoints[s->idx[k]], path.waypoints[s->idx[k + 1]]);
      }
      if (s->idx.size() >= 2 && s->idx.size() - 2 > 1) queue.push_back(*s);
    }
  }
  return inserts;
}

// ---------------------------------------------------------------------------
// Refine: merge inserts with the path's own waypoints and re-search.

namespace detail {

// Core refinement step over a live query graph (terminals and previous
// inserts must already be attached to qg).
inline void refine_core(RefineState& state, QueryGraph& qg, VertexId start_id,
                        VertexId goal_id, const PolyhedralMap& map, double budget_ms,
                        double max_altitude) {
  if (state.converged) return;
  int depth = 0;
  auto inserts = divide_and_insert(state.current, map, budget_ms, max_altitude, &depth);
  state.division_depth = std::max(state.division_depth, depth);
  // Drop candidates already present from a previous iteration.
  std::vector<GraphVertex> fresh;
  for (const auto& cand : inserts) {
    bool dup = false;
    for (const auto& prev : state.inserted) {
      if (distance(prev.position, cand.position) <= 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) fresh.push_back(cand);
  }
  ++state.iteration;
  if (fresh.empty()) {
    state.converged = true;
    return;
  }
  for (auto& cand : fresh) {
    cand.id = qg.add_point(cand.position);
    state.inserted.push_back(cand);
  }
  const auto refined = qg.shortest_path(start_id, goal_id);
  if (!refined) {  // cannot happen: previous path is still representable
    state.converged = true;
    return;
  }
  if (state.current.length - refined->length < 1e-6) state.converged = true;
  if (refined->length <= state.current.length) state.current = *refined;
}

}  // namespace detail

// Spec-shaped single step: rebuilds the query overlay from the state
// (terminals = path endpoints, plus accumulated inserts), then runs the
// core step above.
inline RefineState refine_once(const RefineState& state, const VisibilityGraph& graph,
                               const PolyhedralMap& map, double budget_ms,
                               double max_altitude = std::numeric_limits<double>::infinity()) {
  RefineState next = state;
  if (next.converged || next.current.waypoints.empty()) return next;
  QueryGraph qg(graph, map);
  const VertexId rid = qg.add_point(next.current.waypoints.front());
  const VertexId gid = qg.add_point(next.current.waypoints.back());
  for (auto& ins : next.inserted) ins.id = qg.add_point(ins.position);
  detail::refine_core(next, qg, rid, gid, map, budget_ms, max_altitude);
  return next;
}

// ---------------------------------------------------------------------------
// Full query.

enum class PlanStatus : std::uint8_t { ok, terminal_in_collision, unreachable };

inline const char* plan_status_name(PlanStatus s) {
  switch (s) {
    case PlanStatus::ok: return "ok";
    case PlanStatus::terminal_in_collision: return "terminal-in-collision";
    default: return "unreachable-on-current-graph";
  }
}

struct PlanResult {
  PlanStatus status = PlanStatus::unreachable;
  Path path;
  RefineState state;
  std::vector<double> iteration_lengths;  // initial first, then per refine
  double attach_ms = 0.0;
  double initial_search_ms = 0.0;
  double refine_ms = 0.0;

  bool ok() const { return status == PlanStatus::ok; }
};

inline PlanResult plan(const VisibilityGraph& graph, const PolyhedralMap& map,
                       const Point3& p_robot, const Point3& p_goal, const NavConfig& config) {
  PlanResult result;
  if (point_strictly_in_layered_obstacle(map, p_robot) ||
      point_strictly_in_layered_obstacle(map, p_goal)) {
    result.status = PlanStatus::terminal_in_collision;
    return result;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto ms_since = [](auto since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
        .count();
  };

  QueryGraph qg(graph, map);
  const VertexId rid = qg.add_point(p_robot);
  const VertexId gid = qg.add_point(p_goal);
  result.attach_ms = ms_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  auto initial = qg.shortest_path(rid, gid);
  result.initial_search_ms = ms_since(t1);
  if (!initial) {
    result.status = PlanStatus::unreachable;
    return result;
  }

  result.state.current = *initial;
  result.iteration_lengths.push_back(initial->length);

  const auto t2 = std::chrono::steady_clock::now();
  for (int it = 0; it < config.max_refine_iterations; ++it) {
    const double remaining = config.time_budget_ms - ms_since(t0);
    if (remaining <= 0.0) break;
    detail::refine_core(result.state, qg, rid, gid, map, remaining, config.max_altitude);
    result.iteration_lengths.push_back(result.state.current.length);
    if (result.state.converged) break;
  }
  result.refine_ms = ms_since(t2);
  result.path = result.state.current;
  result.status = PlanStatus::ok;
  return result;
}

}  // namespace visnav
