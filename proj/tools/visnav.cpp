// visnav: layered polygon maps, 3D visibility graphs, fly-over path
// refinement, oracles and benchmarks behind one executable.
//
// Exit codes: 0 success, 2 precondition violation (bad input file,
// terminal in collision), 3 no path / navigation failure. Parse errors
// use CLI11's own codes.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "visnav/baseline.hpp"
#include "visnav/bench.hpp"
#include "visnav/extraction.hpp"
#include "visnav/global_graph.hpp"
#include "visnav/io.hpp"
#include "visnav/path_search.hpp"
#include "visnav/scene.hpp"
#include "visnav/sim.hpp"
#include "visnav/vgraph.hpp"

namespace fs = std::filesystem;
using namespace visnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPrecondition = 2;
constexpr int kExitNoPath = 3;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget_ms;
  std::optional<int> iters;
  std::string format = "json";
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--seed", o.seed, "RNG seed override");
  cmd->add_option("--budget-ms", o.budget_ms, "time budget override [ms]");
  cmd->add_option("--iters", o.iters, "max refinement iterations override");
  cmd->add_option("--format", o.format, "primary output format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out_dir, "output directory");
}

NavConfig resolve_config(const CommonOpts& o) {
  NavConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.seed) cfg.rng_seed = *o.seed;
  if (o.budget_ms) cfg.time_budget_ms = *o.budget_ms;
  if (o.iters) cfg.max_refine_iterations = *o.iters;
  cfg.validate();
  return cfg;
}

Scene resolve_scene(const std::string& spec, std::uint64_t seed, int count) {
  if (spec.size() > 5 && spec.compare(spec.size() - 5, 5, ".json") == 0) {
    return load_scene(spec);
  }
  return make_named_scene(spec, seed, count);
}

Point3 as_point(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int fail(int code, const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return code;
}

}  // namespace

// --- extract ------------------------------------------------------------

static int cmd_extract(const CommonOpts& o, const std::string& cloud_path) {
  if (!fs::exists(cloud_path)) return fail(kExitPrecondition, "no such cloud: " + cloud_path);
  const NavConfig cfg = resolve_config(o);
  const auto points = read_cloud(cloud_path);
  const PolyhedralMap map = build_polyhedral_map(points, cfg);
  ensure_dir(o.out_dir);
  const std::string out = join(o.out_dir, "map.json");
  detail::save_file(out, map_to_json(map));
  std::printf("map: %d layers, %zu vertices, %zu vertical edges -> %s\n", map.layer_count(),
              map.vertices.size(), map.vertical_edges.size(), out.c_str());
  return kExitOk;
}

// --- build-graph ----------------------------------------------------------

static int cmd_build_graph(const CommonOpts& o, const std::string& cloud_path,
                           const std::string& scene_spec, int obstacles) {
  const NavConfig cfg = resolve_config(o);
  std::vector<Point3> points;
  if (!cloud_path.empty()) {
    if (!fs::exists(cloud_path)) return fail(kExitPrecondition, "no such cloud: " + cloud_path);
    points = read_cloud(cloud_path);
  } else if (!scene_spec.empty()) {
    points = surface_cloud(resolve_scene(scene_spec, cfg.rng_seed, obstacles),
                           bench_cloud_spacing(cfg));
  } else {
    return fail(kExitPrecondition, "build-graph needs --cloud or --scene");
  }
  const PolyhedralMap map = build_polyhedral_map(points, cfg);
  const auto [graph, stats] = build_local_graph(map, cfg);
  ensure_dir(o.out_dir);
  const std::string out = join(o.out_dir, "graph.json");
  save_graph(out, graph, stats, map);
  std::printf("graph: n=%zu m=%zu layers=%d k=%.2f lambda=%.2f build=%.1fms -> %s\n",
              graph.vertices.size(), graph.edges.size(), stats.m, stats.k, stats.lambda,
              stats.build_time, out.c_str());
  return kExitOk;
}

// --- plan -----------------------------------------------------------------

static int cmd_plan(const CommonOpts& o, const std::string& graph_path,
                    const std::string& scene_spec, int obstacles,
                    std::vector<double>& start_v, std::vector<double>& goal_v) {
  const NavConfig cfg = resolve_config(o);
  VisibilityGraph graph;
  PolyhedralMap map;
  Point3 start, goal;
  bool have_terminals = false;
  if (!graph_path.empty()) {
    if (!fs::exists(graph_path)) return fail(kExitPrecondition, "no such graph: " + graph_path);
    GraphFile gf = load_graph(graph_path);
    graph = std::move(gf.graph);
    map = std::move(gf.map);
  } else if (!scene_spec.empty()) {
    const Scene scene = resolve_scene(scene_spec, cfg.rng_seed, obstacles);
    map = build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
    const auto built = build_local_graph(map, cfg);
    graph = built.first;
    start = scene.default_start;
    goal = scene.default_goal;
    have_terminals = true;
  } else {
    return fail(kExitPrecondition, "plan needs --graph or --scene");
  }
  if (start_v.size() == 3) {
    start = as_point(start_v);
    have_terminals = true;
  }
  if (goal_v.size() == 3) {
    goal = as_point(goal_v);
    have_terminals = true;
  }
  if (!have_terminals) return fail(kExitPrecondition, "plan needs --start/--goal");

  const PlanResult result = plan(graph, map, start, goal, cfg);
  ensure_dir(o.out_dir);
  save_path_json(join(o.out_dir, "path.json"), result);
  save_path_csv(join(o.out_dir, "path.csv"), result.path);
  if (result.status == PlanStatus::terminal_in_collision) {
    return fail(kExitPrecondition, "terminal in collision");
  }
  if (result.status == PlanStatus::unreachable) {
    return fail(kExitNoPath, "no path on the current graph");
  }
  std::printf("path: length=%.3f m, %zu waypoints, %d refinement iterations -> %s\n",
              result.path.length, result.path.waypoints.size(), result.state.iteration,
              join(o.out_dir, "path.json").c_str());
  return kExitOk;
}

// --- navigate ---------------------------------------------------------------

static int cmd_navigate(const CommonOpts& o, const std::string& scene_spec, int obstacles,
                        std::vector<double>& start_v, std::vector<double>& goal_v,
                        double speed, int max_cycles, bool dump_graphs) {
  if (scene_spec.empty()) return fail(kExitPrecondition, "navigate needs --scene");
  const NavConfig cfg = resolve_config(o);
  const Scene scene = resolve_scene(scene_spec, cfg.rng_seed, obstacles);
  const Point3 start = start_v.size() == 3 ? as_point(start_v) : scene.default_start;
  const Point3 goal = goal_v.size() == 3 ? as_point(goal_v) : scene.default_goal;

  ensure_dir(o.out_dir);
  NavigateHooks hooks;
  if (dump_graphs) {
    hooks.on_cycle = [&](int cycle, const GlobalGraph& gg, const PolyhedralMap& gmap) {
      char name[64];
      std::snprintf(name, sizeof name, "graph_%05d.json", cycle);
      json j = graph_to_json(gg.graph, GraphStats{}, gmap);
      j["absence"] = gg.absence;
      j["frame_index"] = gg.frame_index;
      detail::save_file(join(o.out_dir, name), j);
    };
  }
  const NavLog log =
      navigate(scene, start, goal, cfg, speed, max_cycles, dump_graphs ? &hooks : nullptr);
  save_navlog_csv(join(o.out_dir, "navlog.csv"), log);
  detail::save_file(join(o.out_dir, "summary.json"), navlog_summary_json(log));
  std::printf("navigate: %s after %zu cycles, travel %.2f m (%.1f s simulated)\n",
              nav_verdict_name(log.verdict), log.cycles.size(), log.travel_distance,
              log.sim_time_s);
  if (log.verdict == NavVerdict::success) return kExitOk;
  if (log.verdict == NavVerdict::start_in_collision) {
    return fail(kExitPrecondition, "start or goal in collision");
  }
  return kExitNoPath;
}

// --- oracle ---------------------------------------------------------------

static int cmd_oracle(const CommonOpts& o, const std::string& scene_spec, int obstacles,
                      std::vector<double>& start_v, std::vector<double>& goal_v) {
  if (scene_spec.empty()) return fail(kExitPrecondition, "oracle needs --scene");
  const NavConfig cfg = resolve_config(o);
  const Scene scene = resolve_scene(scene_spec, cfg.rng_seed, obstacles);
  const Point3 start = start_v.size() == 3 ? as_point(start_v) : scene.default_start;
  const Point3 goal = goal_v.size() == 3 ? as_point(goal_v) : scene.default_goal;

  const PolyhedralMap map =
      build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
  const VoxelGrid3D grid =
      voxelize_map(map, scene.bounds_min, scene.bounds_max, cfg.resolution);
  const auto sc = grid.cell_of(start);
  const auto gc = grid.cell_of(goal);
  if (!sc || !gc || grid.occupied(std::get<0>(*sc), std::get<1>(*sc), std::get<2>(*sc)) ||
      grid.occupied(std::get<0>(*gc), std::get<1>(*gc), std::get<2>(*gc))) {
    return fail(kExitPrecondition, "start or goal not in a free voxel");
  }
  const auto path = astar_26(grid, start, goal);
  if (!path) return fail(kExitNoPath, "voxel A*: disconnected");
  ensure_dir(o.out_dir);
  save_path_csv(join(o.out_dir, "oracle_path.csv"), *path);
  std::printf("oracle: length=%.3f m, %zu voxel waypoints -> %s\n", path->length,
              path->waypoints.size(), join(o.out_dir, "oracle_path.csv").c_str());
  return kExitOk;
}

// --- bench ------------------------------------------------------------------

static int cmd_bench(const CommonOpts& o, const std::string& suite, int scenes, int obstacles) {
  const NavConfig cfg = resolve_config(o);
  ensure_dir(o.out_dir);
  json report;
  report["schema_version"] = kSchemaVersion;
  bool oracle_failure = false;

  if (suite == "quality" || suite == "all") {
    std::vector<QualityRow> rows;
    for (const char* name : {"wall", "dead_end", "garage_like", "factory_like"}) {
      rows.push_back(run_quality_scene(make_named_scene(name), cfg));
    }
    for (int s = 1; s <= scenes; ++s) {
      rows.push_back(run_quality_scene(scene_random(s, obstacles), cfg));
    }
    json jrows = json::array();
    std::ofstream csv(join(o.out_dir, "bench_quality.csv"));
    csv << "scene,n,build_ms,initial_search_ms,refined_search_ms,initial_quality_pct,"
           "refined_quality_pct\n";
    for (const auto& r : rows) {
      const double init_q = r.initial_length > 0 && r.oracle_length > 0
                                ? 100.0 * r.oracle_length / r.initial_length
                                : 0.0;
      const double refined_q = r.quality_pct();
      if (!r.oracle_found) oracle_failure = true;
      jrows.push_back({{"scene", r.scene},
                       {"n", r.vertices},
                       {"build_ms", r.build_ms},
                       {"initial_search_ms", r.initial_search_ms},
                       {"refined_search_ms", r.refine_ms},
                       {"initial_quality_pct", init_q},
                       {"refined_quality_pct", refined_q},
                       {"initial_length", r.initial_length},
                       {"refined_length", r.refined_length},
                       {"oracle_length", r.oracle_length}});
      csv << r.scene << ',' << r.vertices << ',' << r.build_ms << ',' << r.initial_search_ms
          << ',' << r.refine_ms << ',' << init_q << ',' << refined_q << '\n';
      std::printf("%-14s n=%5zu build=%8.1fms quality %.1f%% -> %.1f%%\n", r.scene.c_str(),
                  r.vertices, r.build_ms, init_q, refined_q);
    }
    report["quality"] = jrows;
  }

  if (suite == "scaling" || suite == "all") {
    const auto rows = run_scaling_suite(cfg);
    const double exponent = fit_loglog_exponent(rows);
    json jrows = json::array();
    std::ofstream csv(join(o.out_dir, "bench_scaling.csv"));
    csv << "target_n,actual_n,edges,build_ms\n";
    for (const auto& r : rows) {
      jrows.push_back({{"target_n", r.target_n},
                       {"actual_n", r.actual_n},
                       {"edges", r.edges},
                       {"build_ms", r.build_ms}});
      csv << r.target_n << ',' << r.actual_n << ',' << r.edges << ',' << r.build_ms << '\n';
      std::printf("scaling n=%5zu build=%9.2fms\n", r.actual_n, r.build_ms);
    }
    report["scaling"] = {{"rows", jrows}, {"fitted_exponent", exponent}};
    std::printf("fitted log-log exponent: %.3f\n", exponent);
  }

  if (suite == "latency" || suite == "all") {
    const Scene scene = scaling_scene(500);
    const PolyhedralMap map =
        build_polyhedral_map(surface_cloud(scene, bench_cloud_spacing(cfg)), cfg);
    const auto [graph, stats] = build_local_graph(map, cfg);
    const auto qb = run_query_bench(graph, map, scene, cfg.rng_seed, 51);
    report["latency"] = {{"vertices", qb.vertices},
                         {"queries", qb.attach_plus_search_ms.size()},
                         {"median_ms", qb.median()},
                         {"samples_ms", qb.attach_plus_search_ms}};
    std::printf("latency: n=%zu median attach+search %.2f ms\n", qb.vertices, qb.median());
  }

  detail::save_file(join(o.out_dir, "bench_report.json"), report);
  if (oracle_failure) return fail(kExitNoPath, "oracle failed on at least one scene");
  return kExitOk;
}

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{"3D visibility-graph navigation toolkit"};
  app.require_subcommand(1);

  CommonOpts extract_o, build_o, plan_o, nav_o, oracle_o, bench_o;
  std::string extract_cloud;
  std::string build_cloud, build_scene;
  std::string plan_graph, plan_scene;
  std::string nav_scene, oracle_scene;
  std::string bench_suite = "all";
  std::vector<double> plan_start, plan_goal, nav_start, nav_goal, oracle_start, oracle_goal;
  int build_obstacles = 12, plan_obstacles = 12, nav_obstacles = 12, oracle_obstacles = 12;
  int bench_scenes = 5, bench_obstacles = 12;
  double nav_speed = 2.0;
  int nav_max_cycles = 2000;
  bool nav_dump_graphs = false;

  auto* extract = app.add_subcommand("extract", "point cloud -> polyhedral map JSON");
  add_common(extract, extract_o);
  extract->add_option("--cloud", extract_cloud, ".xyz or .bin point cloud")->required();

  auto* build = app.add_subcommand("build-graph", "cloud or scene -> visibility graph JSON");
  add_common(build, build_o);
  build->add_option("--cloud", build_cloud, ".xyz or .bin point cloud");
  build->add_option("--scene", build_scene, "scene JSON or named layout");
  build->add_option("--obstacles", build_obstacles, "obstacle count for random scenes");

  auto* planc = app.add_subcommand("plan", "shortest path with fly-over refinement");
  add_common(planc, plan_o);
  planc->add_option("--graph", plan_graph, "graph JSON from build-graph");
  planc->add_option("--scene", plan_scene, "scene JSON or named layout");
  planc->add_option("--obstacles", plan_obstacles, "obstacle count for random scenes");
  planc->add_option("--start", plan_start, "x y z")->expected(3);
  planc->add_option("--goal", plan_goal, "x y z")->expected(3);

  auto* nav = app.add_subcommand("navigate", "closed-loop simulation");
  add_common(nav, nav_o);
  nav->add_option("--scene", nav_scene, "scene JSON or named layout")->required();
  nav->add_option("--obstacles", nav_obstacles, "obstacle count for random scenes");
  nav->add_option("--start", nav_start, "x y z")->expected(3);
  nav->add_option("--goal", nav_goal, "x y z")->expected(3);
  nav->add_option("--speed", nav_speed, "robot speed [m/s]");
  nav->add_option("--max-cycles", nav_max_cycles, "cycle cap");
  nav->add_flag("--dump-graphs", nav_dump_graphs, "checkpoint global graph every cycle");

  auto* oraclec = app.add_subcommand("oracle", "voxel-A* ground truth");
  add_common(oraclec, oracle_o);
  oraclec->add_option("--scene", oracle_scene, "scene JSON or named layout")->required();
  oraclec->add_option("--obstacles", oracle_obstacles, "obstacle count for random scenes");
  oraclec->add_option("--start", oracle_start, "x y z")->expected(3);
  oraclec->add_option("--goal", oracle_goal, "x y z")->expected(3);

  auto* bench = app.add_subcommand("bench", "quality / scaling / latency benchmarks");
  add_common(bench, bench_o);
  bench->add_option("--suite", bench_suite, "quality|scaling|latency|all")
      ->check(CLI::IsMember({"quality", "scaling", "latency", "all"}));
  bench->add_option("--scenes", bench_scenes, "random scene count for quality");
  bench->add_option("--obstacles", bench_obstacles, "obstacles per random scene");

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) return cmd_extract(extract_o, extract_cloud);
    if (build->parsed()) {
      return cmd_build_graph(build_o, build_cloud, build_scene, build_obstacles);
    }
    if (planc->parsed()) {
      return cmd_plan(plan_o, plan_graph, plan_scene, plan_obstacles, plan_start, plan_goal);
    }
    if (nav->parsed()) {
      return cmd_navigate(nav_o, nav_scene, nav_obstacles, nav_start, nav_goal, nav_speed,
                          nav_max_cycles, nav_dump_graphs);
    }
    if (oraclec->parsed()) {
      return cmd_oracle(oracle_o, oracle_scene, oracle_obstacles, oracle_start, oracle_goal);
    }
    if (bench->parsed()) return cmd_bench(bench_o, bench_suite, bench_scenes, bench_obstacles);
  } catch (const std::exception& e) {
    return fail(kExitPrecondition, e.what());
  }
  return kExitOk;
}
