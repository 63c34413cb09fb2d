#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "judba/judba.hpp"

namespace judba::testing {

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Devices drawn from the default scenario ranges.
inline std::vector<DeviceProfile> random_devices(std::size_t m, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.num_devices = m;
  spec.rng_seed = seed;
  return generate_scenario(spec);
}

inline UploadDecision random_decision(std::size_t m, std::mt19937_64& rng, bool non_empty = false) {
  UploadDecision d = UploadDecision::all(m, false);
  do {
    for (auto& r : d.rho) r = static_cast<std::uint8_t>(rng() >> 63);
  } while (non_empty && d.count() == 0);
  return d;
}

}  // namespace judba::testing
