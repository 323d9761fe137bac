#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hazardband/event_model.hpp"

namespace hazardband::testing {

// Jumps at 1 and 2, sizes 1 and 1, at risk 3 and 2, n = 3.
inline CountingPath d0_path(double tau = 3.0) {
  CountingPath p;
  p.transition = {"0", "1"};
  p.jump_times = {1.0, 2.0};
  p.jump_sizes = {1, 1};
  p.at_risk = {3, 2};
  p.n_subjects = 3;
  p.tau = tau;
  return p;
}

inline std::vector<SubjectRecord> d0_records() {
  return {{"1", 0.0, 1.0, "0", std::string("1")},
          {"2", 0.0, 2.0, "0", std::string("1")},
          {"3", 0.0, 2.5, "0", std::nullopt}};
}

inline std::vector<SubjectRecord> parse(const std::string& csv) {
  std::istringstream in(csv);
  return parse_event_csv(in);
}

inline std::size_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  std::size_t d = 0;
  while (a != b && d < 1000) {
    a = std::nextafter(a, b);
    ++d;
  }
  return d;
}

}  // namespace hazardband::testing
