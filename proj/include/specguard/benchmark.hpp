#pragma once

#include "specguard/space.hpp"
#include "specguard/stl.hpp"
#include "specguard/systems.hpp"

namespace specguard::benchmark {

/// Planar Segway scenario: state [x, y, tilt, heading, v, tilt_rate,
/// yaw_rate] in R^7, a 5x5 grid of 1m goal cells, a waypoint controller that
/// tracks goal G1 until t >= T and G2 afterwards, and the tilt-safety spec
/// always(|tilt| <= 0.7 rad).
///
/// Environment configuration d = [G1x, G1y, G2x, G2y, T].
struct SegwayScenario {
  NominalModel nominal;
  TrueModel true_model;
  ControllerSpec controller;
  ScenarioConfig config;
  WeightedNorm norm;        // tilt weight 1, all others 1e-6
  std::string spec_text;    // "always (abs(x[2]) <= 0.7)"
  double disturbance_magnitude = 0.0;
};

inline constexpr std::size_t kTiltIndex = 2;

/// 4 integer-grid dims in {1..5} crossed with the switching time T in [0,10].
EnvSpace segway_env_space();

/// Goal cell (1..5, 1..5) -> cell-center position in the 5m x 5m arena.
void goal_center(double gx, double gy, double& px, double& py);

SegwayScenario segway_models(double disturbance_magnitude);

/// Named presets: "default" (certifiable at shipped gains) and "stress"
/// (larger disturbance; demonstrates the non-certified branch).
SegwayScenario segway_preset(const std::string& name);

}  // namespace specguard::benchmark
