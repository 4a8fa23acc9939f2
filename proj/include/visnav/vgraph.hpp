#pragma once

// Local 3D V-graph construction: same-layer visibility, heuristic vertical
// propagation, vertical contour edges, and budgeted random vertex sampling.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <utility>
#include <vector>

#include "visnav/config.hpp"
#include "visnav/geometry.hpp"
#include "visnav/map.hpp"
#include "visnav/rng.hpp"
#include "visnav/threads.hpp"

namespace visnav {

enum class EdgeKind : std::uint8_t { same_layer, inter_layer, vertical_contour, sampled };

inline const char* edge_kind_name(EdgeKind k) {
  switch (k) {
    case EdgeKind::same_layer: return "same_layer";
    case EdgeKind::inter_layer: return "inter_layer";
    case EdgeKind::vertical_contour: return "vertical_contour";
    default: return "sampled";
  }
}

struct GraphEdge {
  VertexId a = kInvalidVertex;  // a < b
  VertexId b = kInvalidVertex;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::same_layer;
};

struct VisibilityGraph {
  std::vector<GraphVertex> vertices;  // id == index
  std::vector<GraphEdge> edges;       // sorted by (a, b), unique pairs
  std::vector<std::vector<std::pair<VertexId, double>>> adj;  // sorted by id

  void rebuild_adjacency() {
    adj.assign(vertices.size(), {});
    for (const auto& e : edges) {
      adj[e.a].emplace_back(e.b, e.weight);
      adj[e.b].emplace_back(e.a, e.weight);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  }

  std::size_t edge_count() const { return edges.size(); }
};

struct GraphStats {
  std::size_t n = 0;               // total vertices
  std::vector<std::size_t> n_l;    // per-layer counts (sampled counted by layer)
  int m = 0;                       // layer count
  double k = 0.0;                  // mean vertical-contour degree
  double lambda = 0.0;             // mean n / (visible-degree + 1)
  double build_time = 0.0;         // wall clock [ms]; never serialized
};

namespace detail {

// Lower kind value wins when the same vertex pair is produced twice
// (vertical contour beats propagation, etc.).
inline int edge_kind_rank(EdgeKind k) {
  switch (k) {
    case EdgeKind::vertical_contour: return 0;
    case EdgeKind::same_layer: return 1;
    case EdgeKind::inter_layer: return 2;
    default: return 3;
  }
}

inline void sort_dedupe_edges(std::vector<GraphEdge>& edges) {
  for (auto& e : edges) {
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return edge_kind_rank(x.kind) < edge_kind_rank(y.kind);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const GraphEdge& x, const GraphEdge& y) {
                            return x.a == y.a && x.b == y.b;
                          }),
              edges.end());
}

}  // namespace detail

// All vertices of v's own layer visible from v. The connecting segments are
// horizontal at the slab mid-height, so only that slab can block them.
inline std::vector<VertexId> same_layer_visibility(const PolyhedralMap& map,
                                                   const GraphVertex& v) {
  std::vector<VertexId> out;
  for (const auto& w : map.vertices) {
    if (w.id == v.id || w.layer != v.layer) continue;
    if (check_visibility({v.position, w.position}, map)) out.push_back(w.id);
  }
  return out;
}

// Breadth-first expansion over vertical contour edges. Every dequeued
// vertex exposes its vertical neighbours; each neighbour is checked against
// v once, and only visible ones are enqueued (the rejected ones are the
// heuristic's blind spot that sampling compensates for).
inline std::vector<VertexId> propagate_vertical_visibility(const PolyhedralMap& map,
                                                           const GraphVertex& v,
                                                           const std::vector<VertexId>& seeds) {
  std::vector<VertexId> result;
  if (map.vertices.empty()) return result;
  std::vector<std::uint8_t> visited(map.vertices.size(), 0);
  std::vector<VertexId> queue;
  queue.reserve(seeds.size());
  for (VertexId s : seeds) {
    if (s < 0 || s >= static_cast<VertexId>(visited.size())) continue;
    if (!visited[s]) {
      visited[s] = 1;
      queue.push_back(s);
    }
  }
  // v itself must never land in the result, but it may sit in the queue as
  // a seed (own-column climb).
  if (v.id >= 0 && v.id < static_cast<VertexId>(visited.size())) visited[v.id] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const VertexId u = queue[head];
    if (u >= static_cast<VertexId>(map.up_links.size())) continue;  // sampled: no links
    const auto probe = [&](VertexId w) {
      if (visited[w]) return;
      visited[w] = 1;
      if (check_visibility({v.position, map.vertices[w].position}, map)) {
        result.push_back(w);
        queue.push_back(w);
      }
    };
    for (VertexId w : map.vertical_neighbors_up(u)) probe(w);
    for (VertexId w : map.vertical_neighbors_down(u)) probe(w);
  }
  std::sort(result.begin(), result.end());
  return result;
}

// Visible-set computation for one map vertex: same-layer scan plus vertical
// propagation seeded by the same-layer set and the vertex itself (so an
// isolated pillar still climbs its own column).
namespace detail {

inline void connect_map_vertex(const PolyhedralMap& map, const GraphVertex& v,
                               std::vector<GraphEdge>& out) {
  const auto same = same_layer_visibility(map, v);
  // Same-layer checks are symmetric, so each pair is emitted once (w > id).
  for (VertexId w : same) {
    if (w > v.id) {
      out.push_back({v.id, w, distance(v.position, map.vertices[w].position),
                     EdgeKind::same_layer});
    }
  }
  // Propagation discovery is not symmetric (seed sets differ per vertex);
  // emit every find and let the global dedupe fold the duplicates.
  std::vector<VertexId> seeds = same;
  seeds.push_back(v.id);
  for (VertexId w : propagate_vertical_visibility(map, v, seeds)) {
    out.push_back({v.id, w, distance(v.position, map.vertices[w].position),
                   EdgeKind::inter_layer});
  }
}

}  // namespace detail

// Connects an arbitrary free-space point against graph vertices the
// heuristic way: visibility against every vertex in the point's own slab,
// then vertical propagation through the map columns. A point outside every
// slab (above the map) has no "own layer", so all vertices are candidates
// there. Returns sorted ids.
inline std::vector<VertexId> connect_point(const PolyhedralMap& map,
                                           const std::vector<GraphVertex>& graph_vertices,
                                           const Point3& p) {
  std::vector<VertexId> out;
  const int layer = map.base.layer_of_z(p.z);
  std::vector<VertexId> seeds;
  for (const auto& w : graph_vertices) {
    if (layer >= 0 && w.layer != layer) continue;
    if (check_visibility({p, w.position}, map)) {
      out.push_back(w.id);
      if (w.id < static_cast<VertexId>(map.vertices.size())) seeds.push_back(w.id);
    }
  }
  if (layer >= 0) {
    GraphVertex probe;
    probe.id = kInvalidVertex;
    probe.position = p;
    probe.layer = layer;
    for (VertexId w : propagate_vertical_visibility(map, probe, seeds)) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Exhaustive variant used for query-time points (terminals, refinement
// inserts): visibility checked against every vertex. O(n) checks.
inline std::vector<VertexId> connect_point_exhaustive(
    const PolyhedralMap& map, const std::vector<GraphVertex>& graph_vertices,
    const Point3& p) {
  std::vector<VertexId> out;
  for (const auto& w : graph_vertices) {
    if (check_visibility({p, w.position}, map)) out.push_back(w.id);
  }
  return out;
}

// Draws up to N points on existing edges and keeps those that connect.
// Sampling is skipped entirely once the build budget is spent.
inline std::vector<GraphVertex> sample_extra_vertices(const VisibilityGraph& graph,
                                                      const PolyhedralMap& map,
                                                      const NavConfig& config,
                                                      double elapsed_ms) {
  std::vector<GraphVertex> accepted;
  if (elapsed_ms >= config.time_budget_ms) return accepted;
  if (graph.edges.empty() || config.sample_count <= 0) return accepted;
  Rng rng(config.rng_seed);
  for (int s = 0; s < config.sample_count; ++s) {
    const GraphEdge& e = graph.edges[uniform_index(rng, graph.edges.size())];
    const double t = uniform_double(rng, 0.0, 1.0);
    const Point3 p = lerp(graph.vertices[e.a].position, graph.vertices[e.b].position, t);
    GraphVertex v;
    v.id = static_cast<VertexId>(graph.vertices.size() + accepted.size());
    v.position = p;
    v.layer = std::max(0, map.base.layer_of_z(p.z));
    v.polygon_id = -1;
    v.origin = VertexOrigin::sampled;
    if (!connect_point(map, graph.vertices, p).empty()) accepted.push_back(v);
  }
  return accepted;
}

// Full local build: vertical contour edges (validated), same-layer
// visibility, vertical propagation, then budgeted sampling.
inline std::pair<VisibilityGraph, GraphStats> build_local_graph(const PolyhedralMap& map,
                                                                const NavConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  VisibilityGraph graph;
  graph.vertices = map.vertices;

  // Per-vertex work is independent; slot-per-vertex merge keeps the result
  // identical to a sequential run.
  std::vector<std::vector<GraphEdge>> per_vertex(map.vertices.size());
  parallel_for(map.vertices.size(), [&](std::size_t i) {
    detail::connect_map_vertex(map, map.vertices[i], per_vertex[i]);
  });
  for (auto& chunk : per_vertex) {
    graph.edges.insert(graph.edges.end(), chunk.begin(), chunk.end());
  }
  // Vertical contour edges stay graph edges only when the map itself does
  // not contradict them (stepped columns can bury the connecting segment).
  for (const auto& [lo, hi] : map.vertical_edges) {
    const Segment3 seg{map.vertices[lo].position, map.vertices[hi].position};
    if (check_visibility(seg, map)) {
      graph.edges.push_back({lo, hi, seg.length(), EdgeKind::vertical_contour});
    }
  }
  detail::sort_dedupe_edges(graph.edges);

  const auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  const auto sampled = sample_extra_vertices(graph, map, config, elapsed_ms());
  for (const auto& sv : sampled) {
    const auto linked = connect_point(map, graph.vertices, sv.position);
    graph.vertices.push_back(sv);
    for (VertexId w : linked) {
      graph.edges.push_back({w, sv.id, distance(sv.position, graph.vertices[w].position),
                             EdgeKind::sampled});
    }
  }
  detail::sort_dedupe_edges(graph.edges);
  graph.rebuild_adjacency();

  GraphStats stats;
  stats.n = graph.vertices.size();
  stats.m = map.layer_count();
  stats.n_l.assign(std::max(stats.m, 1), 0);
  for (const auto& v : graph.vertices) {
    if (v.layer >= 0 && v.layer < static_cast<int>(stats.n_l.size())) ++stats.n_l[v.layer];
  }
  std::vector<std::size_t> vis_degree(graph.vertices.size(), 0);
  std::size_t vertical_degree_sum = 0;
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::vertical_contour) {
      vertical_degree_sum += 2;
    } else {
      ++vis_degree[e.a];
      ++vis_degree[e.b];
    }
  }
  if (stats.n > 0) {
    stats.k = static_cast<double>(vertical_degree_sum) / static_cast<double>(stats.n);
    double acc = 0.0;
    for (std::size_t d : vis_degree) {
      acc += static_cast<double>(stats.n) / static_cast<double>(d + 1);
    }
    stats.lambda = acc / static_cast<double>(stats.n);
  }
  stats.build_time = elapsed_ms();
  return {std::move(graph), stats};
}

}  // namespace visnav
