#pragma once

#include <string>

// Canned detector/incident feeds used by the ingest tests.  The checked-in
// copies live in tests/fixtures/{detectors.csv,incidents.csv}; the
// raregap_fixture_feeds tool rewrites them from the tables below, and the
// acceptance run asserts the two stay byte-identical.
//
// The feeds are built for the canonical reading: window 06:00-06:20
// (exclusive end), 5-minute bins, link L1, detectors D1 and D2 summed.
// Each day exercises one ingest rule:
//   2022-01-01  clutter: a row before the window (05:55) and a foreign
//               detector (D9) must be ignored; incident at 06:07 lands in
//               the second bin; the 06:20 incident sits exactly on the
//               window end and is excluded.
//   2022-01-02  incident at 05:59 is pre-window and ignored; 06:02 makes
//               the first bin the event bin.
//   2022-01-03  complete flows but no L1 incident: dropped unless days
//               without events are kept.
//   2022-01-04  an L2 incident must not count for L1; the first L1
//               incident (06:16) marks the final bin.
//   2022-01-05  the 06:10 bin is missing: dropped under drop-day and
//               filled under interpolate.
//   2022-01-07  incident with no flow rows at all for that day.
namespace feeds {

inline std::string fixture_detector_feed() {
  struct Row {
    const char* date;
    const char* time;
    const char* detector;
    const char* flow;
  };
  static constexpr Row rows[] = {
      {"2022-01-01", "05:55", "D1", "999"}, {"2022-01-01", "06:00", "D1", "95"},
      {"2022-01-01", "06:00", "D2", "105"}, {"2022-01-01", "06:02", "D9", "999"},
      {"2022-01-01", "06:05", "D1", "105"}, {"2022-01-01", "06:05", "D2", "115"},
      {"2022-01-01", "06:10", "D1", "115"}, {"2022-01-01", "06:10", "D2", "125"},
      {"2022-01-01", "06:15", "D1", "125"}, {"2022-01-01", "06:15", "D2", "135"},
      {"2022-01-02", "06:00", "D1", "85"},  {"2022-01-02", "06:00", "D2", "95"},
      {"2022-01-02", "06:05", "D1", "90"},  {"2022-01-02", "06:05", "D2", "100"},
      {"2022-01-02", "06:10", "D1", "95"},  {"2022-01-02", "06:10", "D2", "105"},
      {"2022-01-02", "06:15", "D1", "100"}, {"2022-01-02", "06:15", "D2", "110"},
      {"2022-01-03", "06:00", "D1", "65"},  {"2022-01-03", "06:00", "D2", "75"},
      {"2022-01-03", "06:05", "D1", "70"},  {"2022-01-03", "06:05", "D2", "80"},
      {"2022-01-03", "06:10", "D1", "75"},  {"2022-01-03", "06:10", "D2", "85"},
      {"2022-01-03", "06:15", "D1", "80"},  {"2022-01-03", "06:15", "D2", "90"},
      {"2022-01-04", "06:00", "D1", "75"},  {"2022-01-04", "06:00", "D2", "85"},
      {"2022-01-04", "06:05", "D1", "80"},  {"2022-01-04", "06:05", "D2", "90"},
      {"2022-01-04", "06:10", "D1", "85"},  {"2022-01-04", "06:10", "D2", "95"},
      {"2022-01-04", "06:15", "D1", "90"},  {"2022-01-04", "06:15", "D2", "100"},
      {"2022-01-05", "06:00", "D1", "69"},  {"2022-01-05", "06:00", "D2", "79"},
      {"2022-01-05", "06:05", "D1", "71"},  {"2022-01-05", "06:05", "D2", "81"},
      {"2022-01-05", "06:15", "D1", "75"},  {"2022-01-05", "06:15", "D2", "85"},
  };
  std::string out = "date,time,detector_id,flow\n";
  for (const Row& r : rows) {
    out += r.date;
    out += ',';
    out += r.time;
    out += ',';
    out += r.detector;
    out += ',';
    out += r.flow;
    out += '\n';
  }
  return out;
}

inline std::string fixture_incident_feed() {
  struct Row {
    const char* date;
    const char* time;
    const char* link;
  };
  static constexpr Row rows[] = {
      {"2022-01-01", "06:07", "L1"}, {"2022-01-01", "06:20", "L1"},
      {"2022-01-02", "05:59", "L1"}, {"2022-01-02", "06:02", "L1"},
      {"2022-01-04", "06:11", "L2"}, {"2022-01-04", "06:16", "L1"},
      {"2022-01-04", "06:19", "L1"}, {"2022-01-05", "06:01", "L1"},
      {"2022-01-07", "06:03", "L1"},
  };
  std::string out = "date,time,link_id\n";
  for (const Row& r : rows) {
    out += r.date;
    out += ',';
    out += r.time;
    out += ',';
    out += r.link;
    out += '\n';
  }
  return out;
}

}  // namespace feeds
