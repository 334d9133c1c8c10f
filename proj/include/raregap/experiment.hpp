#pragma once

// Canned experiment scenarios and the (scenario, N, seed, method) sweep that
// produces statistic-vs-sample-size curves.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "raregap/core.hpp"
#include "raregap/estimators.hpp"
#include "raregap/hypothesis_test.hpp"
#include "raregap/ingest.hpp"
#include "raregap/parallel.hpp"
#include "raregap/rng.hpp"
#include "raregap/simulate.hpp"

namespace raregap {

enum class Scenario {
  SingleLinkNull,         // constant event rate: state does not matter
  SingleLinkAlternative,  // rate jumps when flow crosses a threshold
  MultiLinkNull,
  MultiLinkAlternative,
  FromCsv,                // seeded subsamples of an ingested trajectory file
};

inline std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::SingleLinkNull: return "single-link-null";
    case Scenario::SingleLinkAlternative: return "single-link-alt";
    case Scenario::MultiLinkNull: return "multi-link-null";
    case Scenario::MultiLinkAlternative: return "multi-link-alt";
    case Scenario::FromCsv: return "from-csv";
  }
  throw std::logic_error("scenario_name: bad enum");
}

inline Scenario scenario_from_name(const std::string& name) {
  for (Scenario s : {Scenario::SingleLinkNull, Scenario::SingleLinkAlternative,
                     Scenario::MultiLinkNull, Scenario::MultiLinkAlternative, Scenario::FromCsv})
    if (scenario_name(s) == name) return s;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

inline SingleLinkParams single_link_null_params() {
  SingleLinkParams p;
  p.event_model = EventModel::constant(0.01);
  return p;
}

inline SingleLinkParams single_link_alternative_params() {
  SingleLinkParams p;
  p.event_model = EventModel::thresholded(0.01, 0.10, 109.0);
  return p;
}

inline MultiLinkParams multi_link_null_params(int links) {
  MultiLinkParams p;
  p.links = links;
  p.event_model = EventModel::constant(0.02);
  return p;
}

inline MultiLinkParams multi_link_alternative_params(int links) {
  MultiLinkParams p;
  p.links = links;
  p.event_model = EventModel::thresholded(0.02, 0.30, 105.0);
  return p;
}

struct ExperimentSpec {
  Scenario scenario = Scenario::SingleLinkNull;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds;
  bool run_gap = true;        // the sup CDF-gap statistic
  bool run_baseline = false;  // the fixed-time comparison
  int baseline_t = 1;
  int links = 2;              // multi-link scenarios
  std::string input_csv;      // FromCsv scenario

  void validate() const {
    if (n_values.empty()) throw std::invalid_argument("ExperimentSpec: no sample sizes");
    if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: no seeds");
    for (std::size_t n : n_values)
      if (n == 0) throw std::invalid_argument("ExperimentSpec: sample sizes must be >= 1");
    if (!run_gap && !run_baseline)
      throw std::invalid_argument("ExperimentSpec: nothing to run");
    if (baseline_t < 1) throw std::invalid_argument("ExperimentSpec: baseline t must be >= 1");
    if (scenario == Scenario::FromCsv && input_csv.empty())
      throw std::invalid_argument("ExperimentSpec: from-csv needs an input file");
  }
};

// One sweep cell.  `statistic` is empty when that cell's computation failed
// (e.g. the fixed-time baseline found no first event at its t); such cells
// are reported as NA rather than aborting the sweep.
struct CurveCell {
  std::string scenario;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string method;  // "gap" or "baseline"
  std::optional<double> statistic;
};

namespace detail {

// Seeded subsample without replacement: ranks from a Fisher-Yates prefix.
inline TrajectoryDataset subsample(const TrajectoryDataset& ds, std::size_t n,
                                   std::uint64_t seed) {
  if (n > ds.size())
    throw std::runtime_error("subsample: asked for " + std::to_string(n) + " of " +
                             std::to_string(ds.size()) + " trajectories");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5ab5a3u));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform01() *
                                                       static_cast<double>(idx.size() - i));
    std::swap(idx[i], idx[std::min(j, idx.size() - 1)]);
  }
  std::vector<Trajectory> keep;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i) keep.push_back(ds[idx[i]]);
  return TrajectoryDataset(std::move(keep));
}

}  // namespace detail

// Dataset for one sweep cell, before the event-bearing filter.
inline TrajectoryDataset make_scenario_dataset(const ExperimentSpec& spec, std::size_t n,
                                               std::uint64_t seed,
                                               const TrajectoryDataset* csv_data) {
  switch (spec.scenario) {
    case Scenario::SingleLinkNull:
      return simulate_single_link(single_link_null_params(), n, seed);
    case Scenario::SingleLinkAlternative:
      return simulate_single_link(single_link_alternative_params(), n, seed);
    case Scenario::MultiLinkNull:
      return simulate_multi_link(multi_link_null_params(spec.links), n, seed);
    case Scenario::MultiLinkAlternative:
      return simulate_multi_link(multi_link_alternative_params(spec.links), n, seed);
    case Scenario::FromCsv:
      if (!csv_data) throw std::logic_error("make_scenario_dataset: missing csv data");
      return detail::subsample(*csv_data, n, seed);
  }
  throw std::logic_error("make_scenario_dataset: bad enum");
}

// Runs every (n, seed, method) cell of the sweep.  Cells are independent and
// written to per-cell slots, so the output is identical for any worker
// count; rows come back in canonical order (n, then seed, then method).
inline std::vector<CurveCell> run_curves(const ExperimentSpec& spec, int workers = 1) {
  spec.validate();
  std::optional<TrajectoryDataset> csv_data;
  if (spec.scenario == Scenario::FromCsv) csv_data = read_trajectory_csv(spec.input_csv);

  struct Task {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t n : spec.n_values)
    for (std::uint64_t seed : spec.seeds) tasks.push_back({n, seed});

  const int methods = (spec.run_gap ? 1 : 0) + (spec.run_baseline ? 1 : 0);
  std::vector<CurveCell> cells(tasks.size() * static_cast<std::size_t>(methods));
  detail::parallel_for(tasks.size(), workers, [&](std::size_t k) {
    const Task& task = tasks[k];
    const TrajectoryDataset raw =
        make_scenario_dataset(spec, task.n, task.seed, csv_data ? &*csv_data : nullptr);
    std::optional<TrajectoryDataset> filtered;  // event-bearing trajectories only
    std::optional<double> gap_stat, base_stat;
    try {
      filtered = raw.event_bearing();
    } catch (const std::runtime_error&) {
      // no events at all: both methods are NA for this cell
    }
    if (filtered) {
      if (spec.run_gap) {
        try {
          gap_stat = sup_cdf_gap(*filtered).value;
        } catch (const std::runtime_error&) {
        }
      }
      if (spec.run_baseline) {
        try {
          base_stat = baseline_sup_gap(*filtered, spec.baseline_t).statistic;
        } catch (const std::exception&) {
          // empty conditional sample (or t outside the horizon): NA cell
        }
      }
    }
    std::size_t slot = k * static_cast<std::size_t>(methods);
    if (spec.run_gap) {
      cells[slot++] = {scenario_name(spec.scenario), task.n, task.seed, "gap", gap_stat};
    }
    if (spec.run_baseline) {
      cells[slot] = {scenario_name(spec.scenario), task.n, task.seed, "baseline", base_stat};
    }
  });

  std::sort(cells.begin(), cells.end(), [](const CurveCell& a, const CurveCell& b) {
    return std::tie(a.scenario, a.n, a.seed, a.method) <
           std::tie(b.scenario, b.n, b.seed, b.method);
  });
  return cells;
}

inline std::string curve_cells_to_csv(const std::vector<CurveCell>& cells) {
  std::string out = "scenario,N,seed,method,statistic\n";
  for (const CurveCell& c : cells) {
    out += c.scenario;
    out += ',';
    out += std::to_string(c.n);
    out += ',';
    out += std::to_string(c.seed);
    out += ',';
    out += c.method;
    out += ',';
    if (c.statistic)
      detail::append_double(out, *c.statistic);
    else
      out += "NA";
    out += '\n';
  }
  return out;
}

// Merges with any existing file: cells already present keep their recorded
// values (append-only semantics), new cells are added, and the result is
// rewritten in canonical order.  Re-running an identical sweep is a no-op.
inline void write_curves_csv(const std::string& path, const std::vector<CurveCell>& cells) {
  std::map<std::tuple<std::string, std::size_t, std::uint64_t, std::string>, std::string>
      merged;
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::string line;
      std::size_t ln = 0;
      while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (ln == 1) {
          if (line != "scenario,N,seed,method,statistic")
            throw std::runtime_error(path + ":1: not a curves file");
          continue;
        }
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != 5) throw std::runtime_error(path + ":" + std::to_string(ln) +
                                                    ": expected 5 fields");
        try {
          merged[{std::string(f[0]), static_cast<std::size_t>(std::stoull(std::string(f[1]))),
                  static_cast<std::uint64_t>(std::stoull(std::string(f[2]))),
                  std::string(f[3])}] = std::string(f[4]);
        } catch (const std::exception&) {
          throw std::runtime_error(path + ":" + std::to_string(ln) + ": bad row");
        }
      }
    }
  }
  for (const CurveCell& c : cells) {
    const auto key = std::make_tuple(c.scenario, c.n, c.seed, c.method);
    if (merged.count(key)) continue;  // existing cells are never rewritten
    std::string v = "NA";
    if (c.statistic) {
      v.clear();
      detail::append_double(v, *c.statistic);
    }
    merged[key] = v;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(path + ": cannot open file for writing");
  os << "scenario,N,seed,method,statistic\n";
  for (const auto& [key, value] : merged)
    os << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
       << std::get<3>(key) << ',' << value << '\n';
  if (!os) throw std::runtime_error(path + ": write failed");
}

}  // namespace raregap
