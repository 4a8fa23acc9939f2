#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace visnav {

// Tunables for the whole pipeline. Defaults follow the shipped planner
// profile: 0.15 m grid, 60x60 m local window, 20 ms budgets.
struct NavConfig {
  double resolution = 0.15;         // occupancy cell size [m]
  double slab_height = 1.0;         // layer thickness [m]
  double inflation_radius = 0.45;   // robot-size dilation [m]
  int knn_k = 3;                    // vertical neighbours per vertex
  double knn_radius = 0.0;          // 0 = auto (2 x inflation_radius)
  int sample_count = 5;             // extra vertices sampled per build
  double time_budget_ms = 20.0;     // build / refine budget
  double local_extent = 60.0;       // local window edge length [m]
  int disappear_frames = 5;         // misses before a vertex is dropped
  int max_refine_iterations = 2;
  std::uint64_t rng_seed = 1;
  double simplify_epsilon = 0.0;    // 0 = auto (2 x resolution)
  double max_altitude = std::numeric_limits<double>::infinity();

  double effective_knn_radius() const {
    return knn_radius > 0.0 ? knn_radius : 2.0 * inflation_radius;
  }
  double effective_simplify_epsilon() const {
    return simplify_epsilon > 0.0 ? simplify_epsilon : 2.0 * resolution;
  }
  double correspondence_tolerance() const { return 2.0 * resolution; }

  void validate() const {
    if (resolution <= 0.0) throw std::invalid_argument("NavConfig: resolution must be > 0");
    if (slab_height <= 0.0) throw std::invalid_argument("NavConfig: slab_height must be > 0");
    if (inflation_radius < 0.0) throw std::invalid_argument("NavConfig: inflation_radius < 0");
    if (knn_k < 1) throw std::invalid_argument("NavConfig: knn_k must be >= 1");
    if (sample_count < 0) throw std::invalid_argument("NavConfig: sample_count < 0");
    if (time_budget_ms <= 0.0) throw std::invalid_argument("NavConfig: time_budget_ms <= 0");
    if (local_extent <= 0.0) throw std::invalid_argument("NavConfig: local_extent <= 0");
    if (disappear_frames < 1) throw std::invalid_argument("NavConfig: disappear_frames < 1");
    if (max_refine_iterations < 0) throw std::invalid_argument("NavConfig: max_refine_iterations < 0");
  }
};

}  // namespace visnav
