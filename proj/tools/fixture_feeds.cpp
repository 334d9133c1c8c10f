#include "fixture_feeds.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

// Rewrites the detector/incident feed fixtures.  Usage:
//   raregap_fixture_feeds [output-dir]   (default: current directory)
int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : ".";
  try {
    write_file(dir + "/detectors.csv", feeds::fixture_detector_feed());
    write_file(dir + "/incidents.csv", feeds::fixture_incident_feed());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << dir << "/detectors.csv and " << dir << "/incidents.csv\n";
  return 0;
}
