#pragma once

// Closed-loop simulation: spherical-fan range sensor, incremental map and
// graph maintenance, and a fixed-rate navigate() loop with logging.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "visnav/config.hpp"
#include "visnav/extraction.hpp"
#include "visnav/global_graph.hpp"
#include "visnav/map.hpp"
#include "visnav/path_search.hpp"
#include "visnav/scene.hpp"
#include "visnav/vgraph.hpp"

namespace visnav {

inline constexpr double kSensorRange = 30.0;
inline constexpr int kSensorRays = 16384;
inline constexpr double kCycleHz = 7.5;
inline constexpr double kGoalProximity = 1.0;
inline constexpr double kStuckDisplacement = 0.01;
inline constexpr int kStuckCycles = 20;

// One 360 x 90 degree fan of `rays` first-hit returns. Grid is azimuth-major
// with a 4:1 azimuth:elevation ray split (both spans sampled uniformly).
inline std::vector<Point3> cast_sensor(const Scene& scene, const Point3& pose,
                                       double range = kSensorRange, int rays = kSensorRays) {
  const int n_az = std::max(4, static_cast<int>(std::llround(2.0 * std::sqrt(double(rays)))));
  const int n_el = std::max(1, rays / n_az);
  const double el_lo = -0.25 * 3.14159265358979323846;  // -45 deg
  const double el_hi = 0.25 * 3.14159265358979323846;
  std::vector<Point3> out;
  for (int ia = 0; ia < n_az; ++ia) {
    const double az = 2.0 * 3.14159265358979323846 * ia / n_az;
    for (int ie = 0; ie < n_el; ++ie) {
      const double el = n_el == 1 ? 0.0 : el_lo + (el_hi - el_lo) * ie / (n_el - 1);
      const Point3 dir{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
      const auto t = ray_cast(scene, pose, dir, range);
      if (t) out.push_back({pose.x + dir.x * *t, pose.y + dir.y * *t, pose.z + dir.z * *t});
    }
  }
  return out;
}

enum class NavVerdict : std::uint8_t { success, stuck, unreachable, max_cycles, start_in_collision };

inline const char* nav_verdict_name(NavVerdict v) {
  switch (v) {
    case NavVerdict::success: return "success";
    case NavVerdict::stuck: return "stuck";
    case NavVerdict::unreachable: return "unreachable";
    case NavVerdict::max_cycles: return "max-cycles";
    default: return "start-in-collision";
  }
}

struct NavCycle {
  int cycle = 0;
  Point3 pose;            // after this cycle's motion
  double path_length = -1.0;  // planned length this cycle, -1 when no path
  double moved = 0.0;
  std::int32_t graph_vertices = 0;
  std::int64_t graph_edges = 0;
  std::string plan_status;
  double update_ms = 0.0;  // sensing + map + merge (wall clock, excluded from equality)
  double search_ms = 0.0;  // plan / fallback search (wall clock, excluded from equality)
};

struct NavLog {
  std::vector<NavCycle> cycles;
  NavVerdict verdict = NavVerdict::max_cycles;
  double travel_distance = 0.0;
  double sim_time_s = 0.0;  // cycles / rate, not wall clock
  Point3 final_pose;
  std::vector<Point3> trace;  // pose per cycle, starting pose first
};

// Content equality ignoring the wall-clock columns; the determinism check.
inline bool navlog_equal_ignoring_time(const NavLog& a, const NavLog& b) {
  if (a.verdict != b.verdict || a.cycles.size() != b.cycles.size()) return false;
  if (a.travel_distance != b.travel_distance || a.sim_time_s != b.sim_time_s) return false;
  if (a.trace.size() != b.trace.size()) return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (a.trace[i].x != b.trace[i].x || a.trace[i].y != b.trace[i].y ||
        a.trace[i].z != b.trace[i].z) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.cycles.size(); ++i) {
    const auto& x = a.cycles[i];
    const auto& y = b.cycles[i];
    if (x.cycle != y.cycle || x.pose.x != y.pose.x || x.pose.y != y.pose.y ||
        x.pose.z != y.pose.z || x.path_length != y.path_length || x.moved != y.moved ||
        x.graph_vertices != y.graph_vertices || x.graph_edges != y.graph_edges ||
        x.plan_status != y.plan_status) {
      return false;
    }
  }
  return true;
}

namespace detail {

// Advance `step` meters along the path from its first waypoint; returns the
// untraversed remainder (starting at the new pose).
inline Path advance_and_trim(const Path& path, double step) {
  if (path.waypoints.empty()) return {};
  double left = step;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    const double seg = distance(path.waypoints[i - 1], path.waypoints[i]);
    if (seg <= kGeomTol) continue;
    if (left <= seg) {
      std::vector<Point3> rest;
      rest.push_back(lerp(path.waypoints[i - 1], path.waypoints[i], left / seg));
      rest.insert(rest.end(), path.waypoints.begin() + i, path.waypoints.end());
      return Path::from_points(std::move(rest));
    }
    left -= seg;
  }
  return Path::from_points({path.waypoints.back()});
}

// Signed clearance of p against the inflated obstacle set at its layer:
// positive outside, negative inside, +inf where there is no layer.
inline double layered_clearance(const PolyhedralMap& map, const Point3& p) {
  const int li = map.base.layer_of_z(p.z);
  if (li < 0) return std::numeric_limits<double>::max();
  double best = std::numeric_limits<double>::max();
  for (const auto& poly : map.base.polygons[li]) {
    const double d = polygon_boundary_distance(p.xy(), poly);
    best = std::min(best, crossing_parity_inside(p.xy(), poly) ? -d : d);
  }
  return best;
}

// Sidestep target when the inflated map has grown over the current pose:
// the candidate one step away with the best clearance. The pose is still
// physically clear (the inflation collar covers it), so a short move
// through the collar toward free space is safe.
inline std::optional<Point3> escape_step(const PolyhedralMap& map, const Point3& pose,
                                         double step, double max_altitude) {
  std::optional<Point3> best;
  double best_clear = 0.0;
  for (int k = 0; k < 17; ++k) {
    Point3 dir{0.0, 0.0, 1.0};
    if (k < 16) {
      const double a = 2.0 * 3.14159265358979323846 * k / 16;
      dir = {std::cos(a), std::sin(a), 0.0};
    }
    const Point3 cand = pose + dir * step;
    if (cand.z > max_altitude || cand.z < 0.0) continue;
    const double c = layered_clearance(map, cand);
    if (c > best_clear) {
      best_clear = c;
      best = cand;
    }
  }
  return best;
}

// When the goal is not yet connected, head for the reachable vertex
// closest to it (the frontier of explored space).
inline std::optional<Path> frontier_path(const VisibilityGraph& graph, const PolyhedralMap& map,
                                         const Point3& robot, const Point3& goal) {
  if (graph.vertices.empty()) return std::nullopt;
  QueryGraph qg(graph, map);
  const VertexId rid = qg.add_point(robot);
  const auto tree = qg.search(rid);
  VertexId best = kInvalidVertex;
  double best_d = std::numeric_limits<double>::max();
  for (const auto& v : graph.vertices) {
    if (!tree.reached(v.id) || v.id == rid) continue;
    const double d = distance(v.position, goal);
    if (d < best_d - kGeomTol || (std::abs(d - best_d) <= kGeomTol && v.id < best)) {
      best_d = d;
      best = v.id;
    }
  }
  if (best < 0) return std::nullopt;
  auto p = qg.extract_path(tree, rid, best);
  if (p && p->waypoints.size() < 2) return std::nullopt;
  return p;
}

}  // namespace detail

// Optional per-cycle observer (graph checkpointing for --dump-graphs).
struct NavigateHooks {
  std::function<void(int cycle, const GlobalGraph&, const PolyhedralMap&)> on_cycle;
};

// Fixed-rate sense -> map -> merge -> plan -> move loop. The map grows from
// accumulated (voxel-deduplicated) returns; the graph is maintained
// incrementally via merge_local. Wholly deterministic for a fixed config
// whenever the time budgets are not binding.
inline NavLog navigate(const Scene& scene, const Point3& start, const Point3& goal,
                       const NavConfig& config, double speed = 2.0, int max_cycles = 2000,
                       const NavigateHooks* hooks = nullptr) {
  NavLog log;
  log.final_pose = start;
  log.trace.push_back(start);
  if (point_strictly_in_scene_obstacle(scene, start) ||
      point_strictly_in_scene_obstacle(scene, goal)) {
    log.verdict = NavVerdict::start_in_collision;
    return log;
  }

  NavConfig cfg = config;  // the scene ceiling bounds fly-over altitude
  cfg.max_altitude = std::min(cfg.max_altitude, scene.bounds_max.z);

  const double step = speed / kCycleHz;
  VoxelCloud seen(cfg.resolution);
  GlobalGraph gg;
  Point3 pose = start;
  Path route;  // untraversed remainder of the route being followed
  int still = 0;

  const auto ms_between = [](auto a, auto b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    NavCycle row;
    row.cycle = cycle;

    const auto t0 = std::chrono::steady_clock::now();
    seen.insert_all(cast_sensor(scene, pose));
    const PolyhedralMap gmap = build_polyhedral_map(seen.points(), cfg);

    std::vector<Point3> local_pts;
    const double half = cfg.local_extent * 0.5;
    for (const auto& p : seen.points()) {
      if (std::abs(p.x - pose.x) <= half && std::abs(p.y - pose.y) <= half) {
        local_pts.push_back(p);
      }
    }
    const PolyhedralMap lmap = build_polyhedral_map(local_pts, cfg);
    const auto [lgraph, lstats] = build_local_graph(lmap, cfg);
    gg = merge_local(gg, lgraph, pose, cfg.local_extent, gmap, cfg);
    if (hooks && hooks->on_cycle) hooks->on_cycle(cycle, gg, gmap);
    const auto t1 = std::chrono::steady_clock::now();
    row.update_ms = ms_between(t0, t1);
    row.graph_vertices = static_cast<std::int32_t>(gg.graph.vertices.size());
    row.graph_edges = static_cast<std::int64_t>(gg.graph.edges.size());

    const auto result = plan(gg.graph, gmap, pose, goal, cfg);
    Path to_follow;
    row.plan_status = plan_status_name(result.status);
    if (result.ok()) {
      to_follow = result.path;
      row.path_length = result.path.length;
    } else if (result.status == PlanStatus::unreachable) {
      if (auto fp = detail::frontier_path(gg.graph, gmap, pose, goal)) {
        to_follow = *fp;
        row.path_length = fp->length;
        row.plan_status = "frontier";
      }
    } else if (result.status == PlanStatus::terminal_in_collision &&
               point_strictly_in_layered_obstacle(gmap, pose)) {
      // Newly observed geometry inflated over the pose; sidestep out.
      if (const auto esc = detail::escape_step(gmap, pose, step, cfg.max_altitude)) {
        to_follow = Path::from_points({pose, *esc});
        row.plan_status = "escape";
      }
    }
    if (to_follow.waypoints.size() < 2 && route.waypoints.size() >= 2) {
      // Planning failed transiently (e.g. mid-fly-over the map widened under
      // the robot and no graph vertex is line-of-sight). Keep following the
      // remaining committed route as long as its immediate leg stays clear.
      if (check_visibility({route.waypoints[0], route.waypoints[1]}, gmap)) {
        to_follow = route;
        row.path_length = route.length;
        row.plan_status = "follow";
      }
    }
    const auto t2 = std::chrono::steady_clock::now();
    row.search_ms = ms_between(t1, t2);

    Point3 next = pose;
    if (to_follow.waypoints.size() >= 2) {
      route = detail::advance_and_trim(to_follow, std::min(step, to_follow.length));
      next = route.waypoints.front();
    } else {
      route = Path{};
    }
    row.moved = distance(pose, next);
    log.travel_distance += row.moved;
    pose = next;
    row.pose = pose;
    log.cycles.push_back(row);
    log.trace.push_back(pose);

    if (distance(pose, goal) <= kGoalProximity) {
      log.verdict = NavVerdict::success;
      break;
    }
    still = row.moved < kStuckDisplacement ? still + 1 : 0;
    if (still >= kStuckCycles) {
      log.verdict = to_follow.waypoints.size() < 2 ? NavVerdict::unreachable : NavVerdict::stuck;
      break;
    }
  }
  log.sim_time_s = static_cast<double>(log.cycles.size()) / kCycleHz;
  log.final_pose = pose;
  return log;
}

}  // namespace visnav
