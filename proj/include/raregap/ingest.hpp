#pragma once

// Turning raw per-detector flow logs and incident logs into one trajectory
// per day: fixed daily window, fixed-width time bins, per-bin mean over the
// reporting detectors, and a binary flag per bin marking whether an incident
// started in it.  Also the exact-round-trip trajectory CSV format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "raregap/core.hpp"

namespace raregap {

struct DetectorRecord {
  std::string date;  // YYYY-MM-DD
  int minute = 0;    // minute of day
  std::string detector_id;
  double flow = 0.0;
};

struct IncidentRecord {
  std::string date;
  int minute = 0;
  std::string link_id;
};

struct IngestConfig {
  int window_start_minute = 6 * 60;   // 06:00 inclusive
  int window_end_minute = 14 * 60;    // 14:00 exclusive
  int bin_minutes = 5;
  std::string link_id;                      // empty: accept every incident
  std::vector<std::string> detector_ids;    // the link's detectors; empty: accept all
  bool drop_no_event = true;                // exclude days with no incident
  enum class MissingBinPolicy { DropDay, Interpolate };
  MissingBinPolicy missing_bin_policy = MissingBinPolicy::DropDay;

  int bin_count() const { return (window_end_minute - window_start_minute) / bin_minutes; }

  void validate() const {
    if (bin_minutes < 1) throw std::invalid_argument("IngestConfig: bin width must be >= 1");
    if (window_start_minute < 0 || window_end_minute > 24 * 60 ||
        window_start_minute >= window_end_minute)
      throw std::invalid_argument("IngestConfig: bad daily window");
    if ((window_end_minute - window_start_minute) % bin_minutes != 0)
      throw std::invalid_argument("IngestConfig: window must be a whole number of bins");
    if (bin_count() < 1) throw std::invalid_argument("IngestConfig: window has no bins");
  }
};

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line_no,
                                    const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

inline bool all_digits(std::string_view s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return !s.empty();
}

inline int to_int(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("not an integer");
  return v;
}

// YYYY-MM-DD with plausibility checks; returned as the validated string.
inline std::string parse_date(std::string_view s, const std::string& path, std::size_t ln) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !all_digits(s.substr(0, 4)) ||
      !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
    parse_fail(path, ln, "bad date '" + std::string(s) + "', expected YYYY-MM-DD");
  const int month = to_int(s.substr(5, 2));
  const int day = to_int(s.substr(8, 2));
  if (month < 1 || month > 12 || day < 1 || day > 31)
    parse_fail(path, ln, "bad date '" + std::string(s) + "'");
  return std::string(s);
}

// HH:MM -> minute of day.
inline int parse_time(std::string_view s, const std::string& path, std::size_t ln) {
  if (s.size() != 5 || s[2] != ':' || !all_digits(s.substr(0, 2)) || !all_digits(s.substr(3, 2)))
    parse_fail(path, ln, "bad time '" + std::string(s) + "', expected HH:MM");
  const int hh = to_int(s.substr(0, 2));
  const int mm = to_int(s.substr(3, 2));
  if (hh > 23 || mm > 59) parse_fail(path, ln, "bad time '" + std::string(s) + "'");
  return hh * 60 + mm;
}

inline double parse_finite(std::string_view s, const std::string& path, std::size_t ln,
                           const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
    parse_fail(path, ln, std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, static_cast<std::size_t>(res.ptr - buf));
}

}  // namespace detail

inline std::vector<DetectorRecord> read_detector_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0] != "date,time,detector_id,flow")
    detail::parse_fail(path, 1, "expected header 'date,time,detector_id,flow'");
  std::vector<DetectorRecord> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) detail::parse_fail(path, i + 1, "empty line");
    const auto f = detail::split_csv(lines[i]);
    if (f.size() != 4) detail::parse_fail(path, i + 1, "expected 4 fields");
    DetectorRecord r;
    r.date = detail::parse_date(f[0], path, i + 1);
    r.minute = detail::parse_time(f[1], path, i + 1);
    r.detector_id = std::string(f[2]);
    if (r.detector_id.empty()) detail::parse_fail(path, i + 1, "empty detector_id");
    r.flow = detail::parse_finite(f[3], path, i + 1, "flow");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<IncidentRecord> read_incident_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0] != "date,time,link_id")
    detail::parse_fail(path, 1, "expected header 'date,time,link_id'");
  std::vector<IncidentRecord> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) detail::parse_fail(path, i + 1, "empty line");
    const auto f = detail::split_csv(lines[i]);
    if (f.size() != 3) detail::parse_fail(path, i + 1, "expected 3 fields");
    IncidentRecord r;
    r.date = detail::parse_date(f[0], path, i + 1);
    r.minute = detail::parse_time(f[1], path, i + 1);
    r.link_id = std::string(f[2]);
    if (r.link_id.empty()) detail::parse_fail(path, i + 1, "empty link_id");
    out.push_back(std::move(r));
  }
  return out;
}

// Per-bin mean flow across reporting detectors for ONE day's records.
// Records outside the window or from detectors not in the configured set are
// ignored.  A bin with no records at all is an error ("missing bin"); the
// day-level policy for that lives in build_daily_trajectories.
inline std::vector<double> aggregate_detectors(const std::vector<DetectorRecord>& day_records,
                                               const IngestConfig& cfg) {
  cfg.validate();
  const int K = cfg.bin_count();
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(K), 0);
  const bool filter = !cfg.detector_ids.empty();
  for (const DetectorRecord& r : day_records) {
    if (r.minute < cfg.window_start_minute || r.minute >= cfg.window_end_minute) continue;
    if (filter && std::find(cfg.detector_ids.begin(), cfg.detector_ids.end(), r.detector_id) ==
                      cfg.detector_ids.end())
      continue;
    const int b = (r.minute - cfg.window_start_minute) / cfg.bin_minutes;
    sums[static_cast<std::size_t>(b)] += r.flow;
    counts[static_cast<std::size_t>(b)] += 1;
  }
  std::vector<double> means(static_cast<std::size_t>(K), 0.0);
  for (int b = 0; b < K; ++b) {
    if (counts[static_cast<std::size_t>(b)] == 0)
      throw std::runtime_error("missing bin " + std::to_string(b + 1));
    means[static_cast<std::size_t>(b)] =
        sums[static_cast<std::size_t>(b)] / static_cast<double>(counts[static_cast<std::size_t>(b)]);
  }
  return means;
}

namespace detail {

// Like aggregate_detectors but leaves missing bins marked instead of
// throwing, so the caller can apply a policy.
inline bool aggregate_day(const std::vector<DetectorRecord>& day_records,
                          const IngestConfig& cfg, std::vector<double>& means,
                          IngestConfig::MissingBinPolicy policy) {
  const int K = cfg.bin_count();
  std::vector<double> sums(static_cast<std::size_t>(K), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(K), 0);
  const bool filter = !cfg.detector_ids.empty();
  for (const DetectorRecord& r : day_records) {
    if (r.minute < cfg.window_start_minute || r.minute >= cfg.window_end_minute) continue;
    if (filter && std::find(cfg.detector_ids.begin(), cfg.detector_ids.end(), r.detector_id) ==
                      cfg.detector_ids.end())
      continue;
    const int b = (r.minute - cfg.window_start_minute) / cfg.bin_minutes;
    sums[static_cast<std::size_t>(b)] += r.flow;
    counts[static_cast<std::size_t>(b)] += 1;
  }
  means.assign(static_cast<std::size_t>(K), 0.0);
  std::vector<int> missing;
  for (int b = 0; b < K; ++b) {
    if (counts[static_cast<std::size_t>(b)] == 0)
      missing.push_back(b);
    else
      means[static_cast<std::size_t>(b)] = sums[static_cast<std::size_t>(b)] /
                                           static_cast<double>(counts[static_cast<std::size_t>(b)]);
  }
  if (missing.empty()) return true;
  if (policy == IngestConfig::MissingBinPolicy::DropDay) return false;

  // Interpolate linearly between the surrounding reported bins; a gap
  // touching either edge of the window cannot be filled, so the day drops.
  if (missing.front() == 0 || missing.back() == K - 1) return false;
  std::size_t i = 0;
  while (i < missing.size()) {
    std::size_t j = i;
    while (j + 1 < missing.size() && missing[j + 1] == missing[j] + 1) ++j;
    const int lo = missing[i] - 1;            // reported
    const int hi = missing[j] + 1;            // reported
    const double a = means[static_cast<std::size_t>(lo)];
    const double b = means[static_cast<std::size_t>(hi)];
    for (int k = missing[i]; k <= missing[j]; ++k) {
      const double frac = static_cast<double>(k - lo) / static_cast<double>(hi - lo);
      means[static_cast<std::size_t>(k)] = a + (b - a) * frac;
    }
    i = j + 1;
  }
  return true;
}

}  // namespace detail

struct IngestResult {
  TrajectoryDataset dataset;
  std::vector<std::string> day_ids;                 // aligned with dataset order
  std::vector<std::string> dropped_missing_bins;    // days lost to coverage gaps
  std::vector<std::string> dropped_no_event;        // days lost to the exclusion rule
};

// One trajectory per day with complete bin coverage: state X_t is the mean
// flow in bin t (1-based), X_0 repeats the first bin as the opening state,
// and flag A_t marks an incident starting in bin t.  An incident at exactly
// the window end falls outside the last (right-open) bin and is ignored.
inline IngestResult build_daily_trajectories(const std::vector<DetectorRecord>& detectors,
                                             const std::vector<IncidentRecord>& incidents,
                                             const IngestConfig& cfg) {
  cfg.validate();
  const int K = cfg.bin_count();

  std::map<std::string, std::vector<DetectorRecord>> by_day;
  for (const DetectorRecord& r : detectors) by_day[r.date].push_back(r);

  std::map<std::string, std::vector<int>> incident_bins;
  for (const IncidentRecord& r : incidents) {
    if (!cfg.link_id.empty() && r.link_id != cfg.link_id) continue;
    if (r.minute < cfg.window_start_minute || r.minute >= cfg.window_end_minute) continue;
    incident_bins[r.date].push_back((r.minute - cfg.window_start_minute) / cfg.bin_minutes);
  }

  std::vector<Trajectory> kept;
  std::vector<std::string> day_ids, dropped_missing, dropped_no_event;
  for (const auto& [day, records] : by_day) {
    std::vector<double> means;
    if (!detail::aggregate_day(records, cfg, means, cfg.missing_bin_policy)) {
      dropped_missing.push_back(day);
      continue;
    }
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(K), 0);
    if (const auto it = incident_bins.find(day); it != incident_bins.end())
      for (int b : it->second) flags[static_cast<std::size_t>(b)] = 1;
    if (cfg.drop_no_event &&
        std::all_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f == 0; })) {
      dropped_no_event.push_back(day);
      continue;
    }
    std::vector<double> states(static_cast<std::size_t>(K) + 1);
    states[0] = means[0];  // opening state: no reading precedes the first bin
    std::copy(means.begin(), means.end(), states.begin() + 1);
    kept.emplace_back(std::move(states), std::move(flags), 1);
    day_ids.push_back(day);
  }
  if (kept.empty()) throw std::runtime_error("no trajectories remain after ingestion");
  return IngestResult{TrajectoryDataset(std::move(kept)), std::move(day_ids),
                      std::move(dropped_missing), std::move(dropped_no_event)};
}

// Exact-round-trip trajectory table: header traj_id,t,x_1,...,x_n,event; one
// row per (trajectory, t); the event field is empty at t = 0.  Doubles are
// written with shortest-round-trip formatting, so read(write(ds)) restores
// every bit.
inline void write_trajectory_csv(std::ostream& os, const TrajectoryDataset& ds) {
  std::string buf = "traj_id,t";
  for (int d = 1; d <= ds.dimension(); ++d) buf += ",x_" + std::to_string(d);
  buf += ",event\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Trajectory& tr = ds[i];
    for (int t = 0; t <= tr.horizon(); ++t) {
      buf += std::to_string(i);
      buf += ',';
      buf += std::to_string(t);
      for (double v : tr.state(t)) {
        buf += ',';
        detail::append_double(buf, v);
      }
      buf += ',';
      if (t > 0) buf += tr.event(t) ? '1' : '0';
      buf += '\n';
    }
    os << buf;
    buf.clear();
  }
}

inline void write_trajectory_csv(const std::string& path, const TrajectoryDataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open file for writing");
  write_trajectory_csv(os, ds);
  if (!os) throw std::runtime_error(path + ": write failed");
}

inline TrajectoryDataset read_trajectory_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) detail::parse_fail(path, 1, "empty file");
  const auto header = detail::split_csv(lines[0]);
  if (header.size() < 4 || header[0] != "traj_id" || header[1] != "t" ||
      header.back() != "event")
    detail::parse_fail(path, 1, "expected header traj_id,t,x_1,...,x_n,event");
  const int dim = static_cast<int>(header.size()) - 3;
  for (int d = 0; d < dim; ++d)
    if (header[static_cast<std::size_t>(d) + 2] != "x_" + std::to_string(d + 1))
      detail::parse_fail(path, 1, "expected state column x_" + std::to_string(d + 1));

  std::vector<Trajectory> trajs;
  std::unordered_set<std::string> seen_ids;
  std::string cur_id;
  bool open = false;
  std::vector<double> states;
  std::vector<std::uint8_t> flags;

  const auto finalize = [&](std::size_t ln) {
    if (!open) return;
    if (flags.empty())
      detail::parse_fail(path, ln, "trajectory '" + cur_id + "' needs at least one step");
    trajs.emplace_back(std::move(states), std::move(flags), dim);
    states.clear();
    flags.clear();
  };

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t ln = i + 1;
    if (lines[i].empty()) detail::parse_fail(path, ln, "empty line");
    const auto f = detail::split_csv(lines[i]);
    if (f.size() != header.size())
      detail::parse_fail(path, ln, "expected " + std::to_string(header.size()) + " fields");
    const std::string id(f[0]);
    if (id.empty()) detail::parse_fail(path, ln, "empty traj_id");
    if (!open || id != cur_id) {
      finalize(ln);
      if (!seen_ids.insert(id).second)
        detail::parse_fail(path, ln, "trajectory '" + id + "' rows are not contiguous");
      cur_id = id;
      open = true;
    }
    int t = 0;
    try {
      t = detail::to_int(f[1]);
    } catch (const std::exception&) {
      detail::parse_fail(path, ln, "bad t '" + std::string(f[1]) + "'");
    }
    const int expected = static_cast<int>(flags.size()) + (states.empty() ? 0 : 1);
    if (t != expected)
      detail::parse_fail(path, ln, "expected t=" + std::to_string(expected) + ", got " +
                                       std::to_string(t));
    for (int d = 0; d < dim; ++d)
      states.push_back(
          detail::parse_finite(f[static_cast<std::size_t>(d) + 2], path, ln, "state"));
    const auto ev = f.back();
    if (t == 0) {
      if (!ev.empty()) detail::parse_fail(path, ln, "event field must be empty at t=0");
    } else {
      if (ev != "0" && ev != "1")
        detail::parse_fail(path, ln, "event field must be 0 or 1 at t>0");
      flags.push_back(ev == "1" ? 1 : 0);
    }
  }
  finalize(lines.size() + 1);
  if (trajs.empty()) detail::parse_fail(path, lines.size(), "no trajectories in file");
  return TrajectoryDataset(std::move(trajs));
}

}  // namespace raregap
