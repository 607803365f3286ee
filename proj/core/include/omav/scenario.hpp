#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "omav/robustness.hpp"

namespace omav {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what)
      : std::runtime_error(what) {}
};

// Resolved experiment configuration: vehicle, closed-loop scenario, and
// search settings. Built from defaults plus a JSON config file.
struct ScenarioConfig {
  VehicleParams params;
  ScenarioSpec scenario;
  std::array<std::array<double, 4>, 3> poles{};  // per channel x, y, phi

  std::uint64_t seed = 1;
  int samples = 1000;
  int workers = 8;
  PerturbationBox box;
  std::vector<double> sweep_omegas{0.0, 0.1, 1.0, 10.0};
  RangeSearchOptions range_opt;
  ToleranceOptions tol_opt;

  std::uint64_t config_hash = 0;  // digest of the canonical form
};

// Pose-regulation default: hover start at (9, 7, 30 deg), target
// (10, 8, 60 deg), poles at -3, 8 s at 1 ms steps.
ScenarioConfig default_config();

// Unit-circle tracking default: 20 s around (5, 5) at 0.5 rad/s, with an
// 80 deg / 30 deg/s orientation sweep when with_phi is set.
ScenarioConfig default_track_config(bool with_phi);

// Strict parse: unknown keys anywhere are errors. Angle-valued keys accept
// a *_deg spelling; plain spellings are radians. Missing keys keep the
// regulation defaults.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);

// Canonical JSON echo of a resolved config; equal configs produce equal
// bytes. The hash is the FNV-1a digest of this string.
std::string canonical_scenario_json(const ScenarioConfig& cfg);
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

}  // namespace omav
