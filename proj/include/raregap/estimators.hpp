#pragma once

// Distribution estimators for "does the state matter for when the first
// rare event happens".  Two empirical CDFs over the same evaluation grid:
//
//   pre_event_cdf        CDF of the state observed one step before the first
//                        event, across event-bearing trajectories.
//   hazard_mixture_cdf   what that CDF would look like if events ignored the
//                        state: a mixture of per-step survivor state CDFs
//                        weighted by the estimated event hazard at each step.
//
// If the event process does not depend on the state, the two agree up to
// sampling noise; sup_cdf_gap measures their largest pointwise gap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "raregap/core.hpp"
#include "raregap/dominance.hpp"

namespace raregap {

namespace detail {
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
}  // namespace detail

// Empirical distribution function tabulated on an explicit point grid.
class EmpiricalCdf {
 public:
  EmpiricalCdf(std::shared_ptr<const PointGrid> grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("EmpiricalCdf: null grid");
    if (values_.size() != grid_->size())
      throw std::invalid_argument("EmpiricalCdf: values/grid size mismatch");
    for (double& v : values_) {
      if (!(v > -1e-9 && v < 1.0 + 1e-9))
        throw std::invalid_argument("EmpiricalCdf: value outside [0,1]");
      v = detail::clamp01(v);
    }
  }

  const PointGrid& grid() const { return *grid_; }
  std::shared_ptr<const PointGrid> grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double value(std::size_t i) const { return values_[i]; }

  // Right-continuous step evaluation at a scalar x (univariate grids only):
  // the value at the largest grid point <= x, and 0 left of the grid.
  double evaluate(double x) const {
    if (grid_->dimension != 1)
      throw std::logic_error("EmpiricalCdf::evaluate: univariate grids only");
    const auto& g = grid_->flat;
    auto it = std::upper_bound(g.begin(), g.end(), x);
    if (it == g.begin()) return 0.0;
    return values_[static_cast<std::size_t>(it - g.begin()) - 1];
  }

 private:
  std::shared_ptr<const PointGrid> grid_;
  std::vector<double> values_;
};

// Discrete-time event hazard: for each step t, the fraction of trajectories
// still at risk (no event before t, horizon reaches t) whose first event
// lands exactly at t.  Steps nobody reaches get hazard 0.
struct HazardSequence {
  std::vector<double> gammas;                  // index t-1 holds hazard at step t
  std::vector<std::int64_t> at_risk_counts;    // denominators
  std::vector<std::int64_t> first_event_counts;  // numerators

  int max_step() const { return static_cast<int>(gammas.size()); }
};

inline HazardSequence estimate_hazards(const TrajectoryDataset& ds) {
  const int H = ds.max_horizon();
  std::vector<std::int64_t> diff(static_cast<std::size_t>(H) + 1, 0);
  std::vector<std::int64_t> events(static_cast<std::size_t>(H), 0);
  for (const Trajectory& tr : ds) {
    const FirstEventTime T = first_event_time(tr);
    const int last = T ? *T : tr.horizon();  // at risk for t = 1..last
    diff[0] += 1;
    diff[static_cast<std::size_t>(last)] -= 1;
    if (T) events[static_cast<std::size_t>(*T) - 1] += 1;
  }
  HazardSequence hz;
  hz.gammas.resize(static_cast<std::size_t>(H));
  hz.at_risk_counts.resize(static_cast<std::size_t>(H));
  hz.first_event_counts = std::move(events);
  std::int64_t run = 0;
  for (int t = 0; t < H; ++t) {
    run += diff[static_cast<std::size_t>(t)];
    hz.at_risk_counts[static_cast<std::size_t>(t)] = run;
    hz.gammas[static_cast<std::size_t>(t)] =
        run > 0 ? static_cast<double>(hz.first_event_counts[static_cast<std::size_t>(t)]) /
                      static_cast<double>(run)
                : 0.0;
  }
  return hz;
}

namespace detail {

// CDF values over the grid for a plain point sample, each point weighing
// 1/denominator.  Counts are integers, so the result is exact and invariant
// to the sample order.
inline std::vector<double> sample_cdf_values(int dim, std::vector<double> sample_flat,
                                             const PointGrid& grid, double denominator) {
  const std::size_t G = grid.size();
  std::vector<double> values(G, 0.0);
  if (dim == 1) {
    std::sort(sample_flat.begin(), sample_flat.end());
    std::size_t sp = 0;
    std::int64_t count = 0;
    for (std::size_t g = 0; g < G; ++g) {
      while (sp < sample_flat.size() && sample_flat[sp] <= grid.flat[g]) {
        ++count;
        ++sp;
      }
      values[g] = static_cast<double>(count) / denominator;
    }
    return values;
  }
  const std::size_t n = sample_flat.size() / static_cast<std::size_t>(dim);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto pt = [&](std::size_t i) {
    return std::span<const double>(sample_flat.data() + i * static_cast<std::size_t>(dim),
                                   static_cast<std::size_t>(dim));
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lexicographic_less(pt(a), pt(b)); });
  std::vector<double> sorted_flat(sample_flat.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = pt(order[k]);
    std::copy(p.begin(), p.end(), sorted_flat.begin() + k * static_cast<std::size_t>(dim));
  }
  OrthantWeightTree tree(dim, std::move(sorted_flat), std::vector<double>(n, 1.0));
  for (std::size_t g = 0; g < G; ++g)
    values[g] = tree.query(grid.point(g)) / denominator;
  return values;
}

// Weighted sample behind the hazard mixture: on every trajectory, each step
// t it stays at risk contributes its predecessor state X_{t-1} with weight
// hazard_t / N.
struct MixtureSample {
  double first_coord;  // fast path key for dim == 1
  std::size_t flat_offset;
  int t;
};

inline std::vector<double> mixture_values(const TrajectoryDataset& ds, const PointGrid& grid,
                                          const HazardSequence& hz) {
  const int dim = ds.dimension();
  const std::size_t N = ds.size();
  const std::size_t G = grid.size();
  const int H = hz.max_step();

  if (dim == 1) {
    std::vector<std::pair<double, int>> samples;  // (state, step)
    for (const Trajectory& tr : ds) {
      const FirstEventTime T = first_event_time(tr);
      const int last = T ? *T : tr.horizon();
      for (int t = 1; t <= last; ++t) {
        if (hz.gammas[static_cast<std::size_t>(t) - 1] > 0.0)
          samples.emplace_back(tr.state(t - 1)[0], t);
      }
    }
    std::sort(samples.begin(), samples.end());

    PairwiseSumTree tree(static_cast<std::size_t>(H));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(H), 0);
    std::vector<double> values(G, 0.0);
    std::size_t sp = 0;
    for (std::size_t g = 0; g < G; ++g) {
      const double x = grid.flat[g];
      while (sp < samples.size() && samples[sp].first <= x) {
        const std::size_t slot = static_cast<std::size_t>(samples[sp].second) - 1;
        counts[slot] += 1;
        tree.set(slot, (static_cast<double>(counts[slot]) / static_cast<double>(N)) *
                           hz.gammas[slot]);
        ++sp;
      }
      values[g] = tree.total();
    }
    return values;
  }

  // n >= 2: flatten the weighted sample, canonicalize its order, and answer
  // every grid point with an orthant-weight query.
  std::vector<double> flat;
  std::vector<int> steps;
  for (const Trajectory& tr : ds) {
    const FirstEventTime T = first_event_time(tr);
    const int last = T ? *T : tr.horizon();
    for (int t = 1; t <= last; ++t) {
      if (hz.gammas[static_cast<std::size_t>(t) - 1] > 0.0) {
        const auto p = tr.state(t - 1);
        flat.insert(flat.end(), p.begin(), p.end());
        steps.push_back(t);
      }
    }
  }
  const std::size_t m = steps.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto pt = [&](std::size_t i) {
    return std::span<const double>(flat.data() + i * static_cast<std::size_t>(dim),
                                   static_cast<std::size_t>(dim));
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto pa = pt(a), pb = pt(b);
    if (std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end())) return true;
    if (std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end())) return false;
    return steps[a] < steps[b];
  });
  std::vector<double> sorted_flat(flat.size());
  std::vector<double> weights(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto p = pt(order[k]);
    std::copy(p.begin(), p.end(), sorted_flat.begin() + k * static_cast<std::size_t>(dim));
    weights[k] = hz.gammas[static_cast<std::size_t>(steps[order[k]]) - 1] /
                 static_cast<double>(N);
  }
  OrthantWeightTree tree(dim, std::move(sorted_flat), std::move(weights));
  std::vector<double> values(G, 0.0);
  for (std::size_t g = 0; g < G; ++g) values[g] = tree.query(grid.point(g));
  return values;
}

}  // namespace detail

// CDF of the state one step before the first event, over event-bearing
// trajectories.  Throws when no trajectory carries an event.
inline EmpiricalCdf pre_event_cdf(const TrajectoryDataset& ds,
                                  std::shared_ptr<const PointGrid> grid) {
  const int dim = ds.dimension();
  std::vector<double> flat;
  std::size_t ne = 0;
  for (const Trajectory& tr : ds) {
    if (const FirstEventTime T = first_event_time(tr)) {
      const auto p = tr.state(*T - 1);
      flat.insert(flat.end(), p.begin(), p.end());
      ++ne;
    }
  }
  if (ne == 0) throw std::runtime_error("no event-bearing trajectories");
  return EmpiricalCdf(grid, detail::sample_cdf_values(dim, std::move(flat), *grid,
                                                      static_cast<double>(ne)));
}

inline EmpiricalCdf pre_event_cdf(const TrajectoryDataset& ds) {
  return pre_event_cdf(ds, shared_evaluation_grid(ds));
}

// Sub-CDF of X_{t-1} over trajectories that reach step t with no earlier
// event, normalized by the full trajectory count (so it carries the survival
// mass at step t, not a conditional distribution).
inline EmpiricalCdf survivor_state_cdf(const TrajectoryDataset& ds, int t,
                                       std::shared_ptr<const PointGrid> grid) {
  if (t < 1 || t > ds.max_horizon())
    throw std::out_of_range("survivor_state_cdf: t out of range");
  const int dim = ds.dimension();
  std::vector<double> flat;
  for (const Trajectory& tr : ds) {
    if (tr.horizon() < t) continue;
    const FirstEventTime T = first_event_time(tr);
    if (T && *T < t) continue;  // event struck before step t
    const auto p = tr.state(t - 1);
    flat.insert(flat.end(), p.begin(), p.end());
  }
  return EmpiricalCdf(grid, detail::sample_cdf_values(dim, std::move(flat), *grid,
                                                      static_cast<double>(ds.size())));
}

inline EmpiricalCdf survivor_state_cdf(const TrajectoryDataset& ds, int t) {
  return survivor_state_cdf(ds, t, shared_evaluation_grid(ds));
}

// The state CDF a memoryless event process would induce: survivor state
// sub-CDFs mixed with the estimated hazards.  Per-step terms are accumulated
// over a fixed pairwise reduction so results do not depend on traversal
// order.
inline EmpiricalCdf hazard_mixture_cdf(const TrajectoryDataset& ds,
                                       std::shared_ptr<const PointGrid> grid) {
  const HazardSequence hz = estimate_hazards(ds);
  return EmpiricalCdf(grid, detail::mixture_values(ds, *grid, hz));
}

inline EmpiricalCdf hazard_mixture_cdf(const TrajectoryDataset& ds) {
  return hazard_mixture_cdf(ds, shared_evaluation_grid(ds));
}

// Largest pointwise gap between the two CDFs over the evaluation grid, with
// its witness point (ties resolve to the lexicographically smallest).
struct GapStatistic {
  double value = 0.0;
  std::size_t argmax_index = 0;
  StateVector argmax;
};

inline GapStatistic sup_cdf_gap(const TrajectoryDataset& ds,
                                std::shared_ptr<const PointGrid> grid) {
  const int dim = ds.dimension();
  const std::size_t G = grid->size();
  GapStatistic out;

  if (dim == 1) {
    // Single ascending sweep computing both CDFs incrementally; emits the
    // same per-point values as the two estimators (same operations).
    std::vector<double> pev;
    for (const Trajectory& tr : ds)
      if (const FirstEventTime T = first_event_time(tr)) pev.push_back(tr.state(*T - 1)[0]);
    if (pev.empty()) throw std::runtime_error("no event-bearing trajectories");
    std::sort(pev.begin(), pev.end());
    const double ne = static_cast<double>(pev.size());

    const HazardSequence hz = estimate_hazards(ds);
    const std::size_t N = ds.size();
    std::vector<std::pair<double, int>> samples;
    for (const Trajectory& tr : ds) {
      const FirstEventTime T = first_event_time(tr);
      const int last = T ? *T : tr.horizon();
      for (int t = 1; t <= last; ++t)
        if (hz.gammas[static_cast<std::size_t>(t) - 1] > 0.0)
          samples.emplace_back(tr.state(t - 1)[0], t);
    }
    std::sort(samples.begin(), samples.end());

    detail::PairwiseSumTree tree(static_cast<std::size_t>(hz.max_step()));
    std::vector<std::int64_t> counts(static_cast<std::size_t>(hz.max_step()), 0);
    std::size_t p1 = 0, p2 = 0;
    std::int64_t c1 = 0;
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t g = 0; g < G; ++g) {
      const double x = grid->flat[g];
      while (p1 < pev.size() && pev[p1] <= x) {
        ++c1;
        ++p1;
      }
      while (p2 < samples.size() && samples[p2].first <= x) {
        const std::size_t slot = static_cast<std::size_t>(samples[p2].second) - 1;
        counts[slot] += 1;
        tree.set(slot, (static_cast<double>(counts[slot]) / static_cast<double>(N)) *
                           hz.gammas[slot]);
        ++p2;
      }
      const double d = std::abs(static_cast<double>(c1) / ne - detail::clamp01(tree.total()));
      if (d > best) {
        best = d;
        best_i = g;
      }
    }
    out.value = best;
    out.argmax_index = best_i;
    out.argmax = {grid->flat[best_i]};
    return out;
  }

  const EmpiricalCdf b1 = pre_event_cdf(ds, grid);
  const EmpiricalCdf b2 = hazard_mixture_cdf(ds, grid);
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const double d = std::abs(b1.value(g) - b2.value(g));
    if (d > best) {
      best = d;
      best_i = g;
    }
  }
  out.value = best;
  out.argmax_index = best_i;
  const auto p = grid->point(best_i);
  out.argmax.assign(p.begin(), p.end());
  return out;
}

inline GapStatistic sup_cdf_gap(const TrajectoryDataset& ds) {
  return sup_cdf_gap(ds, shared_evaluation_grid(ds));
}

}  // namespace raregap
