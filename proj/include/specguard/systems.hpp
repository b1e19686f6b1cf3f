#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "specguard/signals.hpp"

namespace specguard {

/// State-feedback controller u(t) = U(x(t), d), clamped per-coordinate into
/// the admissible input box.
struct ControllerSpec {
  std::size_t input_dim = 0;
  std::vector<double> input_lo;  // per-coordinate bounds of the input box
  std::vector<double> input_hi;
  // (t, x, d, u_out)
  std::function<void(double, std::span<const double>, std::span<const double>,
                     std::span<double>)>
      feedback;
};

/// Deterministic nominal vector field dx/dt = f_hat(x, u, d).
struct NominalModel {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  // (x, u, d, dx_out)
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<const double>, std::span<double>)>
      field;
};

/// Stochastic twin dx/dt = f(x, u, d, w); w is drawn per integration step
/// from a seeded uniform stream on [-magnitude, magnitude]^disturbance_dim
/// and held constant over the step.
struct TrueModel {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::size_t disturbance_dim = 0;
  double disturbance_magnitude = 0.0;
  // (x, u, d, w, dx_out)
  std::function<void(std::span<const double>, std::span<const double>,
                     std::span<const double>, std::span<const double>,
                     std::span<double>)>
      field;
};

struct ScenarioConfig {
  std::vector<double> x0;
  double t_f = 10.0;
  double dt = 0.01;
};

void validate_scenario(const ScenarioConfig& cfg);

/// Thrown when a simulation leaves the finite region (any |x_i| > 1e9 or a
/// non-finite value). Carries the last finite prefix of the run.
class DivergenceError : public Error {
public:
  DivergenceError(std::vector<double> times, std::vector<double> data, std::size_t dim);
  std::vector<double> prefix_times;
  std::vector<double> prefix_data;
  std::size_t dim;
};

/// Closed-loop fixed-step RK4 with zero-order-hold control recomputed at each
/// step start. Deterministic.
Trajectory simulate_nominal(const NominalModel& model, const ControllerSpec& ctrl,
                            const ScenarioConfig& cfg, std::span<const double> d);

/// As simulate_nominal, with a per-step disturbance draw from the seeded
/// stream. Same seed implies bit-identical output.
Trajectory simulate_true(const TrueModel& model, const ControllerSpec& ctrl,
                         const ScenarioConfig& cfg, std::span<const double> d,
                         std::uint64_t seed);

}  // namespace specguard
