#pragma once

// Synthetic traffic-style generators: a single congested link and a routed
// multi-link network, each paired with an event process that either ignores
// the state (null scenarios) or switches to a higher rate when flow crosses
// a threshold (alternative scenarios).

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "raregap/core.hpp"
#include "raregap/rng.hpp"

namespace raregap {

// Per-step event probability as a function of the current state.
struct EventModel {
  enum class Kind { ConstantBernoulli, ThresholdBernoulli };
  // For multi-dimensional states: fire the high rate when any coordinate
  // crosses the threshold, or when the max coordinate does.  For closed
  // threshold comparisons the two coincide; both are accepted spellings.
  enum class Aggregator { AnyCoordinate, MaxCoordinate };

  Kind kind = Kind::ConstantBernoulli;
  double p = 0.01;  // constant rate
  double p_low = 0.01, p_high = 0.10, threshold = 109.0;
  Aggregator aggregator = Aggregator::AnyCoordinate;

  static EventModel constant(double rate) {
    EventModel m;
    m.kind = Kind::ConstantBernoulli;
    m.p = rate;
    return m;
  }

  static EventModel thresholded(double low, double high, double at,
                                Aggregator agg = Aggregator::AnyCoordinate) {
    EventModel m;
    m.kind = Kind::ThresholdBernoulli;
    m.p_low = low;
    m.p_high = high;
    m.threshold = at;
    m.aggregator = agg;
    return m;
  }

  void validate() const {
    const auto ok = [](double v) { return v > 0.0 && v < 1.0; };
    if (kind == Kind::ConstantBernoulli) {
      if (!ok(p)) throw std::invalid_argument("EventModel: rate must lie in (0,1)");
    } else {
      if (!ok(p_low) || !ok(p_high))
        throw std::invalid_argument("EventModel: rates must lie in (0,1)");
      if (!std::isfinite(threshold))
        throw std::invalid_argument("EventModel: non-finite threshold");
    }
  }

  double hazard(std::span<const double> state) const {
    if (kind == Kind::ConstantBernoulli) return p;
    if (aggregator == Aggregator::AnyCoordinate) {
      for (double v : state)
        if (v >= threshold) return p_high;
      return p_low;
    }
    double mx = state[0];
    for (double v : state)
      if (v > mx) mx = v;
    return mx >= threshold ? p_high : p_low;
  }
};

// One link fed by inflow u: flow decays toward u, slower when the previous
// step had an event (mu drops), plus uniform noise.
struct SingleLinkParams {
  int horizon = 500;
  double mu0 = 0.3;  // relaxation rate, no event at previous step
  double mu1 = 0.2;  // relaxation rate after an event
  double inflow = 100.0;
  double noise_half_width = 10.0;
  // Initial flow.  When absent, the path starts at the inflow fixed point
  // perturbed by one noise draw (u + w0), so the opening state has the same
  // spread as every later one; with the noise off that is exactly u.
  std::optional<double> x0;
  EventModel event_model = EventModel::constant(0.01);

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("SingleLinkParams: horizon must be >= 1");
    if (!(mu0 > 0.0 && mu0 < 1.0) || !(mu1 > 0.0 && mu1 < 1.0))
      throw std::invalid_argument("SingleLinkParams: relaxation rates must lie in (0,1)");
    if (!std::isfinite(inflow)) throw std::invalid_argument("SingleLinkParams: non-finite inflow");
    if (!(noise_half_width >= 0.0) || !std::isfinite(noise_half_width))
      throw std::invalid_argument("SingleLinkParams: noise half-width must be >= 0");
    if (x0 && !std::isfinite(*x0))
      throw std::invalid_argument("SingleLinkParams: non-finite initial state");
    event_model.validate();
  }
};

// R links sharing total inflow u, routed by a softmax preferring emptier
// links; each link gets its own noise draw.
struct MultiLinkParams {
  int links = 2;
  int horizon = 250;
  double mu0 = 0.3;
  double mu1 = 0.2;
  std::optional<double> inflow;        // defaults to 100 * links
  double softmax_beta = 0.1;           // routing sharpness
  double noise_half_width = 10.0;
  std::optional<StateVector> x0;       // default: even inflow split + per-link noise draw
  EventModel event_model = EventModel::constant(0.02);

  double inflow_value() const { return inflow ? *inflow : 100.0 * links; }

  void validate() const {
    if (links < 2) throw std::invalid_argument("MultiLinkParams: needs at least 2 links");
    if (horizon < 1) throw std::invalid_argument("MultiLinkParams: horizon must be >= 1");
    if (!(mu0 > 0.0 && mu0 < 1.0) || !(mu1 > 0.0 && mu1 < 1.0))
      throw std::invalid_argument("MultiLinkParams: relaxation rates must lie in (0,1)");
    if (!std::isfinite(inflow_value()))
      throw std::invalid_argument("MultiLinkParams: non-finite inflow");
    if (!(softmax_beta > 0.0) || !std::isfinite(softmax_beta))
      throw std::invalid_argument("MultiLinkParams: softmax beta must be > 0");
    if (!(noise_half_width >= 0.0) || !std::isfinite(noise_half_width))
      throw std::invalid_argument("MultiLinkParams: noise half-width must be >= 0");
    if (x0) {
      if (static_cast<int>(x0->size()) != links)
        throw std::invalid_argument("MultiLinkParams: initial state has wrong dimension");
      for (double v : *x0)
        if (!std::isfinite(v))
          throw std::invalid_argument("MultiLinkParams: non-finite initial state");
    }
    event_model.validate();
  }
};

namespace detail {

// Draw order is fixed (one initial-state draw when x0 is defaulted, then per
// step the event flag, then noise) so a (seed, trajectory index) pair pins
// the whole path.
inline Trajectory simulate_single_link_path(const SingleLinkParams& p, Rng& rng) {
  const int H = p.horizon;
  const double start =
      p.x0 ? *p.x0 : p.inflow + rng.uniform(-p.noise_half_width, p.noise_half_width);
  std::vector<double> states(static_cast<std::size_t>(H) + 1);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(H));
  states[0] = start;
  int prev_flag = 0;  // no event before the first step
  for (int t = 0; t < H; ++t) {
    const double x = states[static_cast<std::size_t>(t)];
    const bool a = rng.bernoulli(p.event_model.hazard({&x, 1}));
    const double w = rng.uniform(-p.noise_half_width, p.noise_half_width);
    const double mu = prev_flag ? p.mu1 : p.mu0;
    const double next = (1.0 - mu) * x + mu * p.inflow + w;
    if (!std::isfinite(next)) throw std::runtime_error("simulate_single_link: state diverged");
    states[static_cast<std::size_t>(t) + 1] = next;
    flags[static_cast<std::size_t>(t)] = a ? 1 : 0;
    prev_flag = a ? 1 : 0;
  }
  return Trajectory(std::move(states), std::move(flags), 1);
}

inline Trajectory simulate_multi_link_path(const MultiLinkParams& p, Rng& rng) {
  const int R = p.links;
  const int H = p.horizon;
  const double u = p.inflow_value();
  std::vector<double> states(static_cast<std::size_t>(H + 1) * R);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(H));
  for (int i = 0; i < R; ++i)
    states[static_cast<std::size_t>(i)] =
        p.x0 ? (*p.x0)[static_cast<std::size_t>(i)]
             : u / static_cast<double>(R) +
                   rng.uniform(-p.noise_half_width, p.noise_half_width);
  std::vector<double> share(static_cast<std::size_t>(R));
  int prev_flag = 0;
  for (int t = 0; t < H; ++t) {
    const double* x = states.data() + static_cast<std::size_t>(t) * R;
    const bool a = rng.bernoulli(p.event_model.hazard({x, static_cast<std::size_t>(R)}));

    // Softmax over -beta * x with max subtraction for stability.
    double smax = -p.softmax_beta * x[0];
    for (int i = 1; i < R; ++i) smax = std::max(smax, -p.softmax_beta * x[i]);
    double z = 0.0;
    for (int i = 0; i < R; ++i) {
      share[static_cast<std::size_t>(i)] = std::exp(-p.softmax_beta * x[i] - smax);
      z += share[static_cast<std::size_t>(i)];
    }

    const double mu = prev_flag ? p.mu1 : p.mu0;
    double* nx = states.data() + static_cast<std::size_t>(t + 1) * R;
    for (int i = 0; i < R; ++i) {
      const double w = rng.uniform(-p.noise_half_width, p.noise_half_width);
      nx[i] = (1.0 - mu) * x[i] + mu * (share[static_cast<std::size_t>(i)] / z) * u + w;
      if (!std::isfinite(nx[i])) throw std::runtime_error("simulate_multi_link: state diverged");
    }
    flags[static_cast<std::size_t>(t)] = a ? 1 : 0;
    prev_flag = a ? 1 : 0;
  }
  return Trajectory(std::move(states), std::move(flags), R);
}

}  // namespace detail

// n independent trajectories; trajectory i draws from its own stream derived
// from (seed, i), so subsets and reorderings of the index range reproduce
// the same paths.
inline TrajectoryDataset simulate_single_link(const SingleLinkParams& params, std::size_t n,
                                              std::uint64_t seed) {
  params.validate();
  if (n == 0) throw std::invalid_argument("simulate_single_link: n must be >= 1");
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::Rng rng(detail::derive_seed(seed, i));
    out.push_back(detail::simulate_single_link_path(params, rng));
  }
  return TrajectoryDataset(std::move(out));
}

inline TrajectoryDataset simulate_multi_link(const MultiLinkParams& params, std::size_t n,
                                             std::uint64_t seed) {
  params.validate();
  if (n == 0) throw std::invalid_argument("simulate_multi_link: n must be >= 1");
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::Rng rng(detail::derive_seed(seed, i));
    out.push_back(detail::simulate_multi_link_path(params, rng));
  }
  return TrajectoryDataset(std::move(out));
}

}  // namespace raregap
