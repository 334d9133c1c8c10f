#pragma once

// Data model for systems observed as a state path plus a binary rare-event
// flag sequence, and the shared evaluation-grid machinery used by every
// estimator: all distribution functions are compared on the finite set of
// states that actually occur in the data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace raregap {

// One observation of the n-dimensional system state (e.g. link flows).
using StateVector = std::vector<double>;

// Smallest t with A_t = 1; empty when the event never occurs in the horizon.
using FirstEventTime = std::optional<int>;

// True iff x_i <= y_i in every coordinate (closed partial order).
inline bool componentwise_leq(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("componentwise_leq: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > y[i]) return false;
  return true;
}

inline bool lexicographic_less(std::span<const double> x, std::span<const double> y) {
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

// One realization of the system: states X_0..X_H stored row-major, event
// flags A_1..A_H.  Flag A_t is paired with the predecessor state X_{t-1},
// i.e. the state the system was in when the step that produced A_t began.
class Trajectory {
 public:
  Trajectory(std::vector<double> states_flat, std::vector<std::uint8_t> events,
             int dimension = 1)
      : states_(std::move(states_flat)), events_(std::move(events)), dim_(dimension) {
    if (dim_ < 1) throw std::invalid_argument("Trajectory: dimension must be >= 1");
    if (events_.empty()) throw std::invalid_argument("Trajectory: horizon must be >= 1");
    const std::size_t expect = (events_.size() + 1) * static_cast<std::size_t>(dim_);
    if (states_.size() != expect)
      throw std::invalid_argument("Trajectory: expected H+1 states of the given dimension");
    for (double v : states_)
      if (!std::isfinite(v))
        throw std::invalid_argument("Trajectory: non-finite state coordinate");
    for (auto e : events_)
      if (e > 1) throw std::invalid_argument("Trajectory: event flags must be 0 or 1");
  }

  int dimension() const { return dim_; }
  int horizon() const { return static_cast<int>(events_.size()); }

  // X_t for 0 <= t <= H.
  std::span<const double> state(int t) const {
    if (t < 0 || t > horizon()) throw std::out_of_range("Trajectory::state: t out of range");
    return {states_.data() + static_cast<std::size_t>(t) * dim_,
            static_cast<std::size_t>(dim_)};
  }

  // A_t for 1 <= t <= H.
  int event(int t) const {
    if (t < 1 || t > horizon()) throw std::out_of_range("Trajectory::event: t out of range");
    return events_[static_cast<std::size_t>(t) - 1];
  }

  const std::vector<double>& states_flat() const { return states_; }
  const std::vector<std::uint8_t>& event_flags() const { return events_; }

 private:
  std::vector<double> states_;
  std::vector<std::uint8_t> events_;
  int dim_;
};

inline FirstEventTime first_event_time(const Trajectory& traj) {
  for (int t = 1; t <= traj.horizon(); ++t)
    if (traj.event(t)) return t;
  return std::nullopt;
}

// X_{T-1}: the state paired with the first event.  Throws when there is none.
inline std::span<const double> pre_event_state(const Trajectory& traj) {
  const FirstEventTime t = first_event_time(traj);
  if (!t) throw std::runtime_error("no event on trajectory");
  return traj.state(*t - 1);
}

// A batch of independent trajectories sharing one state dimension.  Horizons
// may differ (e.g. days with different observation windows).
class TrajectoryDataset {
 public:
  explicit TrajectoryDataset(std::vector<Trajectory> trajectories)
      : trajs_(std::move(trajectories)) {
    if (trajs_.empty())
      throw std::invalid_argument("TrajectoryDataset: needs at least one trajectory");
    dim_ = trajs_.front().dimension();
    min_h_ = max_h_ = trajs_.front().horizon();
    for (const Trajectory& tr : trajs_) {
      if (tr.dimension() != dim_)
        throw std::invalid_argument("TrajectoryDataset: mixed state dimensions");
      min_h_ = std::min(min_h_, tr.horizon());
      max_h_ = std::max(max_h_, tr.horizon());
    }
  }

  std::size_t size() const { return trajs_.size(); }
  int dimension() const { return dim_; }
  int min_horizon() const { return min_h_; }
  int max_horizon() const { return max_h_; }
  bool common_horizon() const { return min_h_ == max_h_; }

  const Trajectory& operator[](std::size_t i) const { return trajs_[i]; }
  auto begin() const { return trajs_.begin(); }
  auto end() const { return trajs_.end(); }

  std::size_t count_event_bearing() const {
    std::size_t n = 0;
    for (const Trajectory& tr : trajs_)
      if (first_event_time(tr)) ++n;
    return n;
  }

  // The exclusion rule applied before estimation: keep only trajectories on
  // which the event occurs at least once.
  TrajectoryDataset event_bearing() const {
    std::vector<Trajectory> keep;
    keep.reserve(trajs_.size());
    for (const Trajectory& tr : trajs_)
      if (first_event_time(tr)) keep.push_back(tr);
    if (keep.empty()) throw std::runtime_error("no event-bearing trajectories");
    return TrajectoryDataset(std::move(keep));
  }

 private:
  std::vector<Trajectory> trajs_;
  int dim_ = 1;
  int min_h_ = 0;
  int max_h_ = 0;
};

// Deduplicated, lexicographically sorted set of n-dimensional points; the
// finite evaluation set on which suprema over x are realized.
struct PointGrid {
  int dimension = 0;
  std::vector<double> flat;  // size() * dimension reals, row-major

  std::size_t size() const {
    return dimension > 0 ? flat.size() / static_cast<std::size_t>(dimension) : 0;
  }
  std::span<const double> point(std::size_t i) const {
    return {flat.data() + i * static_cast<std::size_t>(dimension),
            static_cast<std::size_t>(dimension)};
  }
};

// All states X_0..X_H of every trajectory, sorted and deduplicated.  Every
// pre-event state is among them, so a maximum over this grid attains the
// supremum of any gap between step functions jumping only at data points
// (exact in one dimension; a tight lower bound for n >= 2).
inline PointGrid evaluation_grid(const TrajectoryDataset& ds) {
  PointGrid grid;
  grid.dimension = ds.dimension();
  const int n = ds.dimension();
  std::size_t total = 0;
  for (const Trajectory& tr : ds) total += static_cast<std::size_t>(tr.horizon()) + 1;

  if (n == 1) {
    grid.flat.reserve(total);
    for (const Trajectory& tr : ds)
      grid.flat.insert(grid.flat.end(), tr.states_flat().begin(), tr.states_flat().end());
    std::sort(grid.flat.begin(), grid.flat.end());
    grid.flat.erase(std::unique(grid.flat.begin(), grid.flat.end()), grid.flat.end());
    return grid;
  }

  std::vector<double> all;
  all.reserve(total * static_cast<std::size_t>(n));
  for (const Trajectory& tr : ds)
    all.insert(all.end(), tr.states_flat().begin(), tr.states_flat().end());

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto pt = [&](std::size_t i) {
    return std::span<const double>(all.data() + i * static_cast<std::size_t>(n),
                                   static_cast<std::size_t>(n));
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lexicographic_less(pt(a), pt(b));
  });

  grid.flat.reserve(all.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto p = pt(order[k]);
    if (k > 0) {
      const auto prev = pt(order[k - 1]);
      if (std::equal(p.begin(), p.end(), prev.begin())) continue;
    }
    grid.flat.insert(grid.flat.end(), p.begin(), p.end());
  }
  grid.flat.shrink_to_fit();
  return grid;
}

inline std::shared_ptr<const PointGrid> shared_evaluation_grid(const TrajectoryDataset& ds) {
  return std::make_shared<const PointGrid>(evaluation_grid(ds));
}

}  // namespace raregap
