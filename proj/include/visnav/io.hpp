#pragma once

// File formats: XYZ clouds (ascii / binary f64le), JSON for scenes, maps,
// graphs, paths and nav summaries, CSV for waypoints and nav logs. All
// JSON payloads carry schema_version = 1.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "visnav/config.hpp"
#include "visnav/map.hpp"
#include "visnav/path_search.hpp"
#include "visnav/scene.hpp"
#include "visnav/sim.hpp"
#include "visnav/vgraph.hpp"

namespace visnav {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// --- point clouds -----------------------------------------------------------

inline void write_cloud_xyz(const std::string& path, const std::vector<Point3>& pts) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(17);
  for (const auto& p : pts) f << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

inline std::vector<Point3> read_cloud_xyz(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<Point3> pts;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Point3 p;
    if (ss >> p.x >> p.y >> p.z) pts.push_back(p);
  }
  return pts;
}

inline void write_cloud_bin(const std::string& path, const std::vector<Point3>& pts) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const auto& p : pts) {
    const double v[3] = {p.x, p.y, p.z};
    f.write(reinterpret_cast<const char*>(v), sizeof v);
  }
}

inline std::vector<Point3> read_cloud_bin(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<Point3> pts;
  double v[3];
  while (f.read(reinterpret_cast<char*>(v), sizeof v)) pts.push_back({v[0], v[1], v[2]});
  return pts;
}

inline std::vector<Point3> read_cloud(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0) {
    return read_cloud_bin(path);
  }
  return read_cloud_xyz(path);
}

// --- JSON helpers -----------------------------------------------------------

namespace detail {

inline json to_json(const Point2& p) { return json::array({p.x, p.y}); }
inline json to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }
inline Point2 point2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }
inline Point3 point3_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline json to_json(const Polygon2D& poly) {
  json arr = json::array();
  for (const auto& p : poly.pts()) arr.push_back(to_json(p));
  return arr;
}

inline Polygon2D polygon_from(const json& j) {
  std::vector<Point2> pts;
  for (const auto& e : j) pts.push_back(point2_from(e));
  return Polygon2D{pts};
}

inline void check_schema(const json& j, const char* kind) {
  if (!j.is_object() || j.value("schema_version", -1) != kSchemaVersion) {
    throw std::runtime_error(std::string("bad or missing schema_version in ") + kind);
  }
}

inline json load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return json::parse(f);
}

inline void save_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace detail

// --- scene ------------------------------------------------------------------

inline json scene_to_json(const Scene& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = s.name;
  j["bounds"] = {{"min", detail::to_json(s.bounds_min)}, {"max", detail::to_json(s.bounds_max)}};
  j["start"] = detail::to_json(s.default_start);
  j["goal"] = detail::to_json(s.default_goal);
  json obs = json::array();
  for (const auto& o : s.obstacles) {
    obs.push_back({{"footprint", detail::to_json(o.footprint)},
                   {"z_min", o.z_min},
                   {"z_max", o.z_max}});
  }
  j["obstacles"] = obs;
  return j;
}

inline Scene scene_from_json(const json& j) {
  detail::check_schema(j, "scene");
  Scene s;
  s.name = j.value("name", "scene");
  s.bounds_min = detail::point3_from(j.at("bounds").at("min"));
  s.bounds_max = detail::point3_from(j.at("bounds").at("max"));
  if (j.contains("start")) s.default_start = detail::point3_from(j.at("start"));
  if (j.contains("goal")) s.default_goal = detail::point3_from(j.at("goal"));
  for (const auto& o : j.at("obstacles")) {
    s.obstacles.emplace_back(detail::polygon_from(o.at("footprint")),
                             o.at("z_min").get<double>(), o.at("z_max").get<double>());
  }
  return s;
}

inline void save_scene(const std::string& path, const Scene& s) {
  detail::save_file(path, scene_to_json(s));
}
inline Scene load_scene(const std::string& path) {
  return scene_from_json(detail::load_file(path));
}

// --- config -----------------------------------------------------------------

inline NavConfig config_from_json(const json& j) {
  NavConfig c;
  c.resolution = j.value("resolution", c.resolution);
  c.slab_height = j.value("slab_height", c.slab_height);
  c.inflation_radius = j.value("inflation_radius", c.inflation_radius);
  c.knn_k = j.value("knn_k", c.knn_k);
  c.knn_radius = j.value("knn_radius", c.knn_radius);
  c.sample_count = j.value("sample_count", c.sample_count);
  c.time_budget_ms = j.value("time_budget_ms", c.time_budget_ms);
  c.local_extent = j.value("local_extent", c.local_extent);
  c.disappear_frames = j.value("disappear_frames", c.disappear_frames);
  c.max_refine_iterations = j.value("max_refine_iterations", c.max_refine_iterations);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.simplify_epsilon = j.value("simplify_epsilon", c.simplify_epsilon);
  c.max_altitude = j.value("max_altitude", c.max_altitude);
  c.validate();
  return c;
}

inline NavConfig load_config(const std::string& path) {
  return config_from_json(detail::load_file(path));
}

// --- layered / polyhedral map -----------------------------------------------

inline json map_to_json(const PolyhedralMap& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["resolution"] = m.base.resolution;
  j["inflation_radius"] = m.base.inflation_radius;
  json slabs = json::array();
  for (const auto& s : m.base.slabs) {
    slabs.push_back({{"index", s.index}, {"z_min", s.z_min}, {"z_max", s.z_max}});
  }
  j["slabs"] = slabs;
  json layers = json::array();
  for (const auto& polys : m.base.polygons) {
    json layer = json::array();
    for (const auto& p : polys) layer.push_back(detail::to_json(p));
    layers.push_back(layer);
  }
  j["polygons"] = layers;
  json verts = json::array();
  for (const auto& v : m.vertices) {
    verts.push_back({{"id", v.id},
                     {"position", detail::to_json(v.position)},
                     {"layer", v.layer},
                     {"polygon_id", v.polygon_id},
                     {"origin", v.origin == VertexOrigin::extracted ? "extracted" : "sampled"}});
  }
  j["vertices"] = verts;
  json vedges = json::array();
  for (const auto& e : m.vertical_edges) vedges.push_back(json::array({e.first, e.second}));
  j["vertical_edges"] = vedges;
  return j;
}

inline PolyhedralMap map_from_json(const json& j) {
  detail::check_schema(j, "map");
  PolyhedralMap m;
  m.base.resolution = j.at("resolution").get<double>();
  m.base.inflation_radius = j.at("inflation_radius").get<double>();
  for (const auto& s : j.at("slabs")) {
    m.base.slabs.push_back(
        {s.at("index").get<int>(), s.at("z_min").get<double>(), s.at("z_max").get<double>()});
  }
  for (const auto& layer : j.at("polygons")) {
    std::vector<Polygon2D> polys;
    for (const auto& p : layer) polys.push_back(detail::polygon_from(p));
    m.base.polygons.push_back(std::move(polys));
  }
  for (const auto& v : j.at("vertices")) {
    GraphVertex gv;
    gv.id = v.at("id").get<VertexId>();
    gv.position = detail::point3_from(v.at("position"));
    gv.layer = v.at("layer").get<int>();
    gv.polygon_id = v.at("polygon_id").get<std::int32_t>();
    gv.origin = v.value("origin", "extracted") == std::string("sampled")
                    ? VertexOrigin::sampled
                    : VertexOrigin::extracted;
    m.vertices.push_back(gv);
  }
  for (const auto& e : j.at("vertical_edges")) {
    m.vertical_edges.emplace_back(e.at(0).get<VertexId>(), e.at(1).get<VertexId>());
  }
  m.finalize();
  return m;
}

// --- graph (embeds its map so downstream queries are self-contained) ---------

inline json graph_to_json(const VisibilityGraph& g, const GraphStats& stats,
                          const PolyhedralMap& map) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json verts = json::array();
  for (const auto& v : g.vertices) {
    verts.push_back({{"id", v.id},
                     {"position", detail::to_json(v.position)},
                     {"layer", v.layer},
                     {"polygon_id", v.polygon_id},
                     {"origin", v.origin == VertexOrigin::extracted ? "extracted" : "sampled"}});
  }
  j["vertices"] = verts;
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back(
        {{"a", e.a}, {"b", e.b}, {"weight", e.weight}, {"kind", edge_kind_name(e.kind)}});
  }
  j["edges"] = edges;
  // build_time is wall clock and deliberately not serialized
  j["stats"] = {{"n", stats.n}, {"n_l", stats.n_l}, {"m", stats.m},
                {"k", stats.k}, {"lambda", stats.lambda}};
  j["map"] = map_to_json(map);
  return j;
}

inline EdgeKind edge_kind_from_name(const std::string& name) {
  if (name == "same_layer") return EdgeKind::same_layer;
  if (name == "inter_layer") return EdgeKind::inter_layer;
  if (name == "vertical_contour") return EdgeKind::vertical_contour;
  if (name == "sampled") return EdgeKind::sampled;
  throw std::runtime_error("unknown edge kind: " + name);
}

struct GraphFile {
  VisibilityGraph graph;
  GraphStats stats;
  PolyhedralMap map;
};

inline GraphFile graph_from_json(const json& j) {
  detail::check_schema(j, "graph");
  GraphFile out;
  for (const auto& v : j.at("vertices")) {
    GraphVertex gv;
    gv.id = v.at("id").get<VertexId>();
    gv.position = detail::point3_from(v.at("position"));
    gv.layer = v.at("layer").get<int>();
    gv.polygon_id = v.at("polygon_id").get<std::int32_t>();
    gv.origin = v.value("origin", "extracted") == std::string("sampled")
                    ? VertexOrigin::sampled
                    : VertexOrigin::extracted;
    out.graph.vertices.push_back(gv);
  }
  for (const auto& e : j.at("edges")) {
    out.graph.edges.push_back({e.at("a").get<VertexId>(), e.at("b").get<VertexId>(),
                               e.at("weight").get<double>(),
                               edge_kind_from_name(e.at("kind").get<std::string>())});
  }
  out.graph.rebuild_adjacency();
  const auto& s = j.at("stats");
  out.stats.n = s.at("n").get<std::size_t>();
  out.stats.n_l = s.at("n_l").get<std::vector<std::size_t>>();
  out.stats.m = s.at("m").get<int>();
  out.stats.k = s.at("k").get<double>();
  out.stats.lambda = s.at("lambda").get<double>();
  out.map = map_from_json(j.at("map"));
  return out;
}

inline void save_graph(const std::string& path, const VisibilityGraph& g,
                       const GraphStats& stats, const PolyhedralMap& map) {
  detail::save_file(path, graph_to_json(g, stats, map));
}
inline GraphFile load_graph(const std::string& path) {
  return graph_from_json(detail::load_file(path));
}

// --- paths ------------------------------------------------------------------

inline json path_to_json(const PlanResult& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["status"] = plan_status_name(r.status);
  json wps = json::array();
  for (const auto& p : r.path.waypoints) wps.push_back(detail::to_json(p));
  j["waypoints"] = wps;
  j["length"] = r.path.length;
  j["iterations"] = r.state.iteration;
  j["division_depth"] = r.state.division_depth;
  j["iteration_lengths"] = r.iteration_lengths;
  j["timing_ms"] = {{"attach", r.attach_ms},
                    {"initial_search", r.initial_search_ms},
                    {"refine", r.refine_ms}};
  return j;
}

inline void save_path_json(const std::string& path, const PlanResult& r) {
  detail::save_file(path, path_to_json(r));
}

inline void save_path_csv(const std::string& path, const Path& p) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(17);
  f << "x,y,z\n";
  for (const auto& w : p.waypoints) f << w.x << ',' << w.y << ',' << w.z << '\n';
}

// --- nav log ------------------------------------------------------------

inline void save_navlog_csv(const std::string& path, const NavLog& log) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << std::setprecision(17);
  f << "cycle,x,y,z,path_length,moved,graph_vertices,graph_edges,plan_status,"
       "update_ms,search_ms\n";
  for (const auto& c : log.cycles) {
    f << c.cycle << ',' << c.pose.x << ',' << c.pose.y << ',' << c.pose.z << ','
      << c.path_length << ',' << c.moved << ',' << c.graph_vertices << ',' << c.graph_edges
      << ',' << c.plan_status << ',' << c.update_ms << ',' << c.search_ms << '\n';
  }
}

inline json navlog_summary_json(const NavLog& log) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["verdict"] = nav_verdict_name(log.verdict);
  j["cycles"] = log.cycles.size();
  j["travel_distance"] = log.travel_distance;
  j["sim_time_s"] = log.sim_time_s;
  j["final_pose"] = detail::to_json(log.final_pose);
  return j;
}

}  // namespace visnav
