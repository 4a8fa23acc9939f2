// Acceptance gates for the navigation toolkit. Each gate prints exactly one
// [PASS]/[WARN]/[FAIL] line; the process exits nonzero if any gate failed.
//
//   1. refined paths within 1.10x of the voxel-A* oracle on random scenes
//   2. refinement lengths non-increasing (1e-9) on every planned instance
//   3. wall scene: lateral initial path, strictly shorter fly-over refinement
//   4. dense-sampling collision oracle clean on all paths and robot traces
//   5. heuristic edge set subset of exhaustive, all edges visibility-sound
//   6. build-time log-log scaling exponent <= 2.3
//   7. dead-end escape: goal reached, travel <= 2x known-map oracle
//   8. attach+search median < 20 ms on a ~5k-vertex graph (warn to 40 ms)
//   9. merge idempotence, M-frame vertex lifecycle, navigate determinism

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "visnav/baseline.hpp"
#include "visnav/bench.hpp"
#include "visnav/config.hpp"
#include "visnav/extraction.hpp"
#include "visnav/global_graph.hpp"
#include "visnav/path_search.hpp"
#include "visnav/scene.hpp"
#include "visnav/sim.hpp"
#include "visnav/vgraph.hpp"

using namespace visnav;

namespace {

struct Gate {
  bool pass = true;
  bool warn = false;
  std::string text;
};

std::vector<Gate> g_gates(10);  // 1-indexed

void set_gate(int id, bool pass, const std::string& text, bool warn = false) {
  g_gates[id] = {pass, warn, text};
}

char buf[512];

// Planner profile shared by the quality gates: effectively unlimited budget
// so results depend only on inputs, altitude capped at the scene ceiling to
// keep the comparison with the bounded voxel grid fair.
NavConfig quality_config(const Scene& scene) {
  NavConfig cfg;
  cfg.time_budget_ms = 1e6;
  cfg.max_altitude = scene.bounds_max.z;
  return cfg;
}

struct SuiteRow {
  std::string name;
  Scene scene;
  PolyhedralMap map;
  PlanResult result;
  bool oracle_found = false;
  double oracle_length = -1.0;
};

SuiteRow run_scene(const Scene& scene) {
  SuiteRow row;
  row.name = scene.name;
  row.scene = scene;
  const NavConfig cfg = quality_config(scene);
  row.map = build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
  const auto [graph, stats] = build_local_graph(row.map, cfg);
  row.result = plan(graph, row.map, scene.default_start, scene.default_goal, cfg);
  const VoxelGrid3D grid =
      voxelize_map(row.map, scene.bounds_min, scene.bounds_max, cfg.resolution);
  if (const auto oracle = astar_26(grid, scene.default_start, scene.default_goal)) {
    row.oracle_found = true;
    row.oracle_length = oracle->length;
  }
  return row;
}

bool monotone(const std::vector<double>& lengths, double tol = 1e-9) {
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] > lengths[i - 1] + tol) return false;
  }
  return true;
}

bool trace_clean(const Scene& scene, const std::vector<Point3>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (segment_hits_scene_obstacle(scene, {trace[i - 1], trace[i]})) return false;
  }
  return true;
}

std::set<std::pair<VertexId, VertexId>> edge_pairs(const VisibilityGraph& g) {
  std::set<std::pair<VertexId, VertexId>> out;
  for (const auto& e : g.edges) out.insert({e.a, e.b});
  return out;
}

}  // namespace

int main() {
  std::printf("acceptance: visibility-graph navigation toolkit\n");

  // --- suite 1: 20 seeded random scenes, shared by gates 1, 2, 4 ------------
  std::vector<SuiteRow> suite;
  for (int s = 1; s <= 20; ++s) suite.push_back(run_scene(scene_random(s, 12)));

  int solvable = 0, within = 0, planned = 0, monotone_ok = 0;
  for (const auto& row : suite) {
    if (row.result.ok()) {
      ++planned;
      if (monotone(row.result.iteration_lengths)) ++monotone_ok;
    }
    if (row.result.ok() && row.oracle_found) {
      ++solvable;
      if (row.result.path.length <= 1.10 * row.oracle_length) ++within;
    }
  }
  std::snprintf(buf, sizeof buf,
                "oracle quality: %d/%d solvable scenes within 1.10x of voxel A* "
                "(planned %d/20, need >=90%%)",
                within, solvable, planned);
  set_gate(1, solvable >= 10 && 10 * within >= 9 * solvable, buf);

  std::snprintf(buf, sizeof buf,
                "refinement monotonicity: %d/%d planned instances non-increasing (tol 1e-9)",
                monotone_ok, planned);
  set_gate(2, planned > 0 && monotone_ok == planned, buf);

  // --- gate 3: fly-over on the canonical wall -------------------------------
  const Scene wall = scene_wall();
  NavConfig wall_cfg = quality_config(wall);
  const PolyhedralMap wall_map =
      build_polyhedral_map(surface_cloud(wall, bench_cloud_spacing(wall_cfg)), wall_cfg);
  const auto [wall_graph, wall_stats] = build_local_graph(wall_map, wall_cfg);

  NavConfig initial_cfg = wall_cfg;
  initial_cfg.max_refine_iterations = 0;
  const PlanResult wall_initial =
      plan(wall_graph, wall_map, wall.default_start, wall.default_goal, initial_cfg);
  const PlanResult wall_refined =
      plan(wall_graph, wall_map, wall.default_start, wall.default_goal, wall_cfg);

  bool wall_ok = wall_initial.ok() && wall_refined.ok();
  bool lateral = false;
  double initial_max_z = 0.0;
  if (wall_ok) {
    // The wall spans x in [2, 18]; the vertex-domain path must go around it.
    for (const auto& p : wall_initial.path.waypoints) {
      lateral = lateral || p.x < 2.0 || p.x > 18.0;
      initial_max_z = std::max(initial_max_z, p.z);
    }
  }
  double refined_max_z = 0.0;
  if (wall_ok) {
    for (const auto& p : wall_refined.path.waypoints) {
      refined_max_z = std::max(refined_max_z, p.z);
    }
  }
  const bool crosses_above = refined_max_z > 3.0;  // wall top is z = 3
  const bool shorter =
      wall_ok && wall_refined.path.length < wall_initial.path.length - 1e-6;
  std::snprintf(buf, sizeof buf,
                "fly-over: initial %.2f m lateral=%s (max z %.2f), refined %.2f m over the "
                "wall (max z %.2f)",
                wall_ok ? wall_initial.path.length : -1.0, lateral ? "yes" : "no",
                initial_max_z, wall_ok ? wall_refined.path.length : -1.0, refined_max_z);
  set_gate(3, wall_ok && lateral && crosses_above && shorter, buf);

  // --- gate 7 runs before 4 so its trace feeds the collision oracle ---------
  const Scene dead_end = scene_dead_end();
  NavConfig nav_cfg;  // realistic per-cycle budget
  const NavLog dead_log = navigate(dead_end, dead_end.default_start, dead_end.default_goal,
                                   nav_cfg, 2.0, 2000);
  const PolyhedralMap dead_map = build_polyhedral_map(
      surface_cloud(dead_end, bench_cloud_spacing(nav_cfg)), nav_cfg);
  const VoxelGrid3D dead_grid =
      voxelize_map(dead_map, dead_end.bounds_min, dead_end.bounds_max, nav_cfg.resolution);
  const auto dead_oracle =
      astar_26(dead_grid, dead_end.default_start, dead_end.default_goal);
  const bool dead_success = dead_log.verdict == NavVerdict::success;
  const bool dead_bounded =
      dead_oracle && dead_log.travel_distance <= 2.0 * dead_oracle->length;
  std::snprintf(buf, sizeof buf,
                "dead-end escape: %s in %zu cycles, travel %.2f m vs oracle %.2f m "
                "(limit 2.00x, got %.2fx)",
                nav_verdict_name(dead_log.verdict), dead_log.cycles.size(),
                dead_log.travel_distance, dead_oracle ? dead_oracle->length : -1.0,
                dead_oracle ? dead_log.travel_distance / dead_oracle->length : -1.0);
  set_gate(7, dead_success && dead_bounded, buf);

  // --- gate 4: dense-sampling collision oracle ------------------------------
  int paths_checked = 0, paths_clean = 0;
  for (const auto& row : suite) {
    if (!row.result.ok()) continue;
    ++paths_checked;
    if (!path_collides_sampled(row.map, row.result.path)) ++paths_clean;
  }
  ++paths_checked;
  if (wall_ok && !path_collides_sampled(wall_map, wall_refined.path)) ++paths_clean;
  const bool dead_trace_clean = trace_clean(dead_end, dead_log.trace);
  std::snprintf(buf, sizeof buf,
                "collision safety: %d/%d refined paths clean, dead-end trace (%zu poses) %s",
                paths_clean, paths_checked, dead_log.trace.size(),
                dead_trace_clean ? "clean" : "IN COLLISION");
  set_gate(4, paths_clean == paths_checked && dead_trace_clean, buf);

  // --- gate 5: heuristic subset + visibility soundness ----------------------
  NavConfig small_cfg;
  small_cfg.sample_count = 0;  // compare the deterministic core vertex set
  small_cfg.time_budget_ms = 1e6;
  std::vector<Scene> small_scenes;
  {
    Scene a;
    a.name = "small_box";
    a.bounds_min = {0, 0, 0};
    a.bounds_max = {10, 10, 3};
    a.obstacles.emplace_back(make_box(5, 5, 1.0, 1.0), 0.0, 2.0);
    small_scenes.push_back(a);

    Scene b = a;
    b.name = "small_two_boxes";
    b.obstacles.emplace_back(make_box(2.5, 7.5, 0.8, 0.6), 0.0, 1.4);
    small_scenes.push_back(b);

    Scene c;
    c.name = "small_tower";
    c.bounds_min = {0, 0, 0};
    c.bounds_max = {12, 12, 5};
    c.obstacles.emplace_back(make_box(6, 6, 1.2, 1.2), 0.0, 3.6);
    c.obstacles.emplace_back(make_box(2.5, 2.5, 0.7, 0.7), 0.0, 1.2);
    small_scenes.push_back(c);

    Scene d;
    d.name = "small_l_wall";
    d.bounds_min = {0, 0, 0};
    d.bounds_max = {12, 12, 3};
    d.obstacles.emplace_back(make_box(6, 4, 3.0, 0.4), 0.0, 1.6);
    d.obstacles.emplace_back(make_box(8.6, 6, 0.4, 2.4), 0.0, 1.6);
    small_scenes.push_back(d);
  }
  int small_maps = 0;
  bool subset_ok = true, sound_ok = true, size_ok = true;
  std::size_t largest_n = 0, edges_seen = 0;
  for (const auto& scene : small_scenes) {
    const PolyhedralMap map =
        build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(small_cfg)), small_cfg);
    if (map.vertices.size() > 60) {
      size_ok = false;
      continue;
    }
    largest_n = std::max(largest_n, map.vertices.size());
    ++small_maps;
    const auto [heur, stats] = build_local_graph(map, small_cfg);
    const auto exhaustive_pairs = edge_pairs(exhaustive_vgraph(map));
    for (const auto& e : heur.edges) {
      ++edges_seen;
      if (!exhaustive_pairs.count({e.a, e.b})) subset_ok = false;
      const Segment3 seg{heur.vertices[e.a].position, heur.vertices[e.b].position};
      if (!check_visibility(seg, map)) sound_ok = false;
    }
  }
  std::snprintf(buf, sizeof buf,
                "heuristic soundness: %d maps (max n=%zu), %zu edges all in exhaustive set "
                "and visibility-checked",
                small_maps, largest_n, edges_seen);
  set_gate(5, small_maps == 4 && size_ok && subset_ok && sound_ok && edges_seen > 0, buf);

  // --- gate 6: build-time scaling -------------------------------------------
  NavConfig scale_cfg;
  const auto scaling_rows = run_scaling_suite(scale_cfg);
  const double exponent = fit_loglog_exponent(scaling_rows);
  std::snprintf(buf, sizeof buf,
                "complexity scaling: fitted exponent %.3f over n=%zu..%zu (limit 2.3)",
                exponent, scaling_rows.front().actual_n, scaling_rows.back().actual_n);
  set_gate(6, exponent > 0.0 && exponent <= 2.3, buf);

  // --- gate 8: query latency -------------------------------------------------
  {
    NavConfig cfg;
    const Scene scene = scaling_scene(500);
    const PolyhedralMap map =
        build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
    const auto [graph, stats] = build_local_graph(map, cfg);
    const QueryBench qb = run_query_bench(graph, map, scene, cfg.rng_seed, 51);
    const double med = qb.median();
    const bool hard_ok = med < 40.0;
    const bool soft_ok = med < 20.0;
    std::snprintf(buf, sizeof buf,
                  "query latency: median attach+search %.2f ms on n=%zu "
                  "(target < 20 ms, hard fail at 40 ms)%s",
                  med, qb.vertices, soft_ok ? "" : " [soft-fail margin]");
    set_gate(8, hard_ok, buf, !soft_ok && hard_ok);
  }

  // --- gate 9: graph lifecycle ------------------------------------------------
  {
    NavConfig cfg;
    cfg.time_budget_ms = 1e6;
    Scene scene;
    scene.name = "lifecycle_box";
    scene.bounds_min = {0, 0, 0};
    scene.bounds_max = {10, 10, 3};
    scene.obstacles.emplace_back(make_box(5, 5, 1.0, 1.0), 0.0, 2.0);
    const PolyhedralMap map =
        build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
    const auto [local, stats] = build_local_graph(map, cfg);
    const Point3 pose{5, 5, 0.5};

    const GlobalGraph g1 = merge_local(GlobalGraph{}, local, pose, cfg.local_extent, map, cfg);
    const GlobalGraph g2 = merge_local(g1, local, pose, cfg.local_extent, map, cfg);
    bool idempotent = g1.graph.vertices.size() == g2.graph.vertices.size() &&
                      g1.graph.edges.size() == g2.graph.edges.size() &&
                      g2.absence == g1.absence && g2.frame_index == 2;
    for (std::size_t i = 0; idempotent && i < g1.graph.vertices.size(); ++i) {
      idempotent = distance(g1.graph.vertices[i].position, g2.graph.vertices[i].position) == 0.0;
    }

    // Age the whole graph with empty observations: retained through frame
    // M-1, dropped at exactly M.
    VisibilityGraph empty_local;
    empty_local.rebuild_adjacency();
    const PolyhedralMap empty_map = build_polyhedral_map(std::vector<Point3>{}, cfg);
    GlobalGraph aged = g1;
    bool lifecycle = !g1.graph.vertices.empty();
    for (int miss = 1; miss < cfg.disappear_frames; ++miss) {
      aged = merge_local(aged, empty_local, pose, cfg.local_extent, empty_map, cfg);
      lifecycle = lifecycle && aged.graph.vertices.size() == g1.graph.vertices.size();
      for (int a : aged.absence) lifecycle = lifecycle && a == miss;
    }
    aged = merge_local(aged, empty_local, pose, cfg.local_extent, empty_map, cfg);
    lifecycle = lifecycle && aged.graph.vertices.empty() && aged.graph.edges.empty();

    // Full closed-loop determinism with a non-binding budget.
    const Scene wall2 = scene_wall();
    NavConfig det_cfg;
    det_cfg.time_budget_ms = 1e6;
    const NavLog run_a =
        navigate(wall2, wall2.default_start, wall2.default_goal, det_cfg, 2.0, 500);
    const NavLog run_b =
        navigate(wall2, wall2.default_start, wall2.default_goal, det_cfg, 2.0, 500);
    const bool deterministic = navlog_equal_ignoring_time(run_a, run_b);

    std::snprintf(buf, sizeof buf,
                  "graph lifecycle: merge idempotent=%s, drop at M=%d frames=%s, "
                  "navigate deterministic=%s",
                  idempotent ? "yes" : "NO", cfg.disappear_frames, lifecycle ? "yes" : "NO",
                  deterministic ? "yes" : "NO");
    set_gate(9, idempotent && lifecycle && deterministic, buf);
  }

  // --- report -----------------------------------------------------------------
  int failures = 0;
  for (int i = 1; i <= 9; ++i) {
    const Gate& g = g_gates[i];
    const char* tag = g.pass ? (g.warn ? "WARN" : "PASS") : "FAIL";
    if (!g.pass) ++failures;
    std::printf("[%s] %d. %s\n", tag, i, g.text.c_str());
  }
  std::printf("acceptance: %d/9 gates passed%s\n", 9 - failures,
              failures ? "" : " -- all green");
  return failures ? 1 : 0;
}
