#include "specguard/benchmark.hpp"

#include <algorithm>
#include <cmath>

namespace specguard::benchmark {

namespace {

// Dynamics constants (documented scenario parameters, not taken from any
// published vehicle).
constexpr double kGravity = 9.81;       // m/s^2
constexpr double kPendulumLength = 0.8; // m, effective inverted-pendulum length
constexpr double kTiltDamping = 0.15;
constexpr double kYawDamping = 0.8;

// Waypoint controller gains.
constexpr double kHeadingGain = 4.0;
constexpr double kHeadingRateGain = 2.0;
constexpr double kDistanceGain = 1.2;
constexpr double kMaxSpeed = 2.5;       // m/s
constexpr double kAccelGain = 2.5;
constexpr double kMaxAccel = 2.0;       // m/s^2, forward
constexpr double kMaxDecel = 4.5;       // m/s^2, braking
constexpr double kMaxLean = 0.4;        // rad, commanded tilt reference
constexpr double kTiltGain = 12.0;
constexpr double kTiltRateGain = 5.0;
constexpr double kGoalTolerance = 0.05; // m

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// State layout indices.
enum { PX, PY, TILT, HEADING, VEL, TILT_RATE, YAW_RATE };

// Shared deterministic part of both vector fields.
void segway_field(std::span<const double> x, std::span<const double> u,
                  std::span<double> dx) {
  double accel = u[0];
  dx[PX] = x[VEL] * std::cos(x[HEADING]);
  dx[PY] = x[VEL] * std::sin(x[HEADING]);
  dx[TILT] = x[TILT_RATE];
  dx[HEADING] = x[YAW_RATE];
  dx[VEL] = accel;
  dx[TILT_RATE] = (kGravity * std::sin(x[TILT]) - accel * std::cos(x[TILT])) /
                      kPendulumLength -
                  kTiltDamping * x[TILT_RATE];
  dx[YAW_RATE] = u[1] - kYawDamping * x[YAW_RATE];
}

void waypoint_feedback(double t, std::span<const double> x,
                       std::span<const double> d, std::span<double> u) {
  double gx, gy;
  // Track G1 until t >= T, then G2.
  if (t < d[4])
    goal_center(d[0], d[1], gx, gy);
  else
    goal_center(d[2], d[3], gx, gy);

  double ex = gx - x[PX];
  double ey = gy - x[PY];
  double dist = std::hypot(ex, ey);

  double v_des = 0.0;
  double yaw_cmd;
  if (dist > kGoalTolerance) {
    double heading_des = std::atan2(ey, ex);
    double e_psi = wrap_angle(heading_des - x[HEADING]);
    yaw_cmd = kHeadingGain * e_psi - kHeadingRateGain * x[YAW_RATE];
    v_des = std::min(kDistanceGain * dist, kMaxSpeed) *
            std::max(0.0, std::cos(e_psi));
  } else {
    yaw_cmd = -kHeadingRateGain * x[YAW_RATE];
  }

  // Braking is allowed to be harder than forward acceleration, so goal
  // switches at speed produce the largest tilt excursions.
  double a_des = std::clamp(kAccelGain * (v_des - x[VEL]), -kMaxDecel, kMaxAccel);
  double lean_ref = std::clamp(a_des / kGravity, -kMaxLean, kMaxLean);

  // Feedback linearization of the tilt subsystem: drives tilt to lean_ref,
  // which in turn produces the commanded acceleration at equilibrium.
  double cos_tilt = std::max(std::cos(x[TILT]), 0.1);
  u[0] = (kGravity * std::sin(x[TILT]) +
          kPendulumLength * (kTiltGain * (x[TILT] - lean_ref) +
                             kTiltRateGain * x[TILT_RATE])) /
         cos_tilt;
  u[1] = yaw_cmd;
}

}  // namespace

EnvSpace segway_env_space() {
  EnvSpace space;
  EnvDim grid;
  grid.kind = EnvDim::Kind::Grid;
  grid.values = {1.0, 2.0, 3.0, 4.0, 5.0};
  space.dims = {grid, grid, grid, grid};
  EnvDim t;
  t.kind = EnvDim::Kind::Continuous;
  t.lo = 0.0;
  t.hi = 10.0;
  space.dims.push_back(t);
  return space;
}

void goal_center(double gx, double gy, double& px, double& py) {
  px = gx - 0.5;
  py = gy - 0.5;
}

SegwayScenario segway_models(double disturbance_magnitude) {
  if (disturbance_magnitude < 0.0)
    throw Error("segway_models: disturbance magnitude must be non-negative");

  SegwayScenario s;
  s.disturbance_magnitude = disturbance_magnitude;

  s.nominal.state_dim = 7;
  s.nominal.input_dim = 2;
  s.nominal.field = [](std::span<const double> x, std::span<const double> u,
                       std::span<const double>, std::span<double> dx) {
    segway_field(x, u, dx);
  };

  s.true_model.state_dim = 7;
  s.true_model.input_dim = 2;
  s.true_model.disturbance_dim = 3;
  s.true_model.disturbance_magnitude = disturbance_magnitude;
  s.true_model.field = [](std::span<const double> x, std::span<const double> u,
                          std::span<const double>, std::span<const double> w,
                          std::span<double> dx) {
    segway_field(x, u, dx);
    // Force/torque disturbances on the actuated accelerations.
    dx[VEL] += w[0];
    dx[TILT_RATE] += w[1];
    dx[YAW_RATE] += w[2];
  };

  s.controller.input_dim = 2;
  s.controller.input_lo = {-8.0, -6.0};
  s.controller.input_hi = {8.0, 6.0};
  s.controller.feedback = waypoint_feedback;

  s.config.x0 = {2.5, 2.5, 0.0, 0.0, 0.0, 0.0, 0.0};
  s.config.t_f = 10.0;
  s.config.dt = 0.01;

  s.norm.weights = {1e-6, 1e-6, 1.0, 1e-6, 1e-6, 1e-6, 1e-6};
  s.spec_text = "always (abs(x[2]) <= 0.7)";
  return s;
}

SegwayScenario segway_preset(const std::string& name) {
  if (name == "default") return segway_models(0.2);
  if (name == "stress") return segway_models(4.0);
  throw Error("unknown segway preset '" + name + "' (expected default|stress)");
}

}  // namespace specguard::benchmark
