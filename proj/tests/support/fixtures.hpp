#pragma once

// Shared test fixtures: a two-trajectory dataset small enough to work every
// estimate by hand, and seeded random dataset generators.

#include <cstdint>
#include <string>
#include <vector>

#include "raregap/core.hpp"
#include "raregap/rng.hpp"

namespace fixtures {

// Trajectory A: states (1, 2, 2), flags (0, 1) -> first event at t=2,
//               pre-event state 2.
// Trajectory B: states (3, 3), flags (1) -> first event at t=1, pre-event
//               state 3.
//
// Hand results on the grid {1, 2, 3}:
//   pre-event CDF          0, 1/2, 1
//   survivor CDF at t=1    1/2, 1/2, 1      (both opening states, /N=2)
//   survivor CDF at t=2    0, 1/2, 1/2      (only A reaches step 2)
//   hazards                1/2 at t=1 (1 of 2), 1 at t=2 (1 of 1)
//   hazard mixture CDF     1/4, 3/4, 1
//   sup gap                1/4 attained first at x=1
//   fixed-time t=1 gap     1/2 attained at x=1 (conditional jumps at 3)
inline raregap::TrajectoryDataset two_trajectories() {
  std::vector<raregap::Trajectory> t;
  t.emplace_back(std::vector<double>{1.0, 2.0, 2.0}, std::vector<std::uint8_t>{0, 1}, 1);
  t.emplace_back(std::vector<double>{3.0, 3.0}, std::vector<std::uint8_t>{1}, 1);
  return raregap::TrajectoryDataset(std::move(t));
}

struct RandomDatasetOptions {
  std::size_t n = 50;
  int max_horizon = 20;
  int dimension = 1;
  double event_rate = 0.08;
  bool jitter_horizons = true;   // mix horizons 1..max
  bool lattice_states = false;   // draw states from a small grid to force ties
  bool force_event = true;       // guarantee at least one event-bearing trajectory
};

inline raregap::TrajectoryDataset random_dataset(raregap::detail::Rng& rng,
                                                 const RandomDatasetOptions& opt) {
  std::vector<raregap::Trajectory> out;
  out.reserve(opt.n);
  bool any_event = false;
  for (std::size_t i = 0; i < opt.n; ++i) {
    const std::size_t h = opt.jitter_horizons
                              ? 1 + static_cast<std::size_t>(rng.uniform01() * opt.max_horizon)
                              : static_cast<std::size_t>(opt.max_horizon);
    std::vector<double> states((h + 1) * static_cast<std::size_t>(opt.dimension));
    for (double& v : states) {
      const double u = rng.uniform(0.0, 10.0);
      v = opt.lattice_states ? std::floor(u * 0.8) * 1.25 : u;
    }
    std::vector<std::uint8_t> flags;
    flags.reserve(h);
    bool traj_event = false;
    for (std::size_t s = 0; s < h; ++s) {
      const bool f = rng.bernoulli(opt.event_rate);
      flags.push_back(f ? 1 : 0);
      traj_event = traj_event || f;
    }
    if (opt.force_event && i + 1 == opt.n && !any_event && !traj_event) flags[h - 1] = 1;
    any_event = any_event || traj_event || flags[h - 1] == 1;
    out.emplace_back(std::move(states), std::move(flags), opt.dimension);
  }
  return raregap::TrajectoryDataset(std::move(out));
}

inline std::string fixture_path(const std::string& name) {
  return std::string(RAREGAP_FIXTURE_DIR) + "/" + name;
}

}  // namespace fixtures
