#include "specguard/systems.hpp"

#include <algorithm>
#include <cmath>

namespace specguard {

namespace {

constexpr double kDivergenceLimit = 1e9;

bool finite_state(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit) return false;
  return true;
}

std::size_t step_count(const ScenarioConfig& cfg) {
  double ratio = cfg.t_f / cfg.dt;
  auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
    throw Error("ScenarioConfig: t_f/dt is not an integer number of steps");
  return n;
}

void clamp_input(const ControllerSpec& ctrl, std::span<double> u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = std::clamp(u[i], ctrl.input_lo[i], ctrl.input_hi[i]);
}

// One classical RK4 step of x' = rhs(x) with u, d (and w) held constant.
template <typename Rhs>
void rk4_step(std::span<double> x, double dt, std::vector<double>& k1,
              std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp, Rhs&& rhs) {
  const std::size_t n = x.size();
  rhs(std::span<const double>(x.data(), n), std::span<double>(k1));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  rhs(std::span<const double>(tmp), std::span<double>(k2));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  rhs(std::span<const double>(tmp), std::span<double>(k3));
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  rhs(std::span<const double>(tmp), std::span<double>(k4));
  for (std::size_t i = 0; i < n; ++i)
    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.x0.empty()) throw Error("ScenarioConfig: empty initial state");
  if (!(cfg.t_f > 0.0)) throw Error("ScenarioConfig: t_f must be positive");
  if (!(cfg.dt > 0.0 && cfg.dt <= cfg.t_f))
    throw Error("ScenarioConfig: need 0 < dt <= t_f");
  step_count(cfg);
}

DivergenceError::DivergenceError(std::vector<double> times, std::vector<double> data,
                                 std::size_t dim_)
    : Error("simulation diverged at t = " +
            std::to_string(times.empty() ? 0.0 : times.back())),
      prefix_times(std::move(times)),
      prefix_data(std::move(data)),
      dim(dim_) {}

namespace {

// Shared closed-loop driver; `stage` supplies the vector field for step k.
template <typename FieldForStep>
Trajectory run_closed_loop(std::size_t state_dim, const ControllerSpec& ctrl,
                           const ScenarioConfig& cfg, std::span<const double> d,
                           FieldForStep&& field_for_step) {
  validate_scenario(cfg);
  if (cfg.x0.size() != state_dim)
    throw Error("simulate: x0 dimension does not match the model");
  if (ctrl.input_lo.size() != ctrl.input_dim || ctrl.input_hi.size() != ctrl.input_dim)
    throw Error("simulate: controller bound dimensions are inconsistent");

  const std::size_t steps = step_count(cfg);
  std::vector<double> times;
  std::vector<double> data;
  times.reserve(steps + 1);
  data.reserve((steps + 1) * state_dim);

  std::vector<double> x = cfg.x0;
  std::vector<double> u(ctrl.input_dim);
  std::vector<double> k1(state_dim), k2(state_dim), k3(state_dim), k4(state_dim),
      tmp(state_dim);

  times.push_back(0.0);
  data.insert(data.end(), x.begin(), x.end());
  if (!finite_state(x)) throw DivergenceError(std::move(times), std::move(data), state_dim);

  for (std::size_t k = 0; k < steps; ++k) {
    double t = static_cast<double>(k) * cfg.dt;
    ctrl.feedback(t, x, d, u);
    clamp_input(ctrl, u);
    auto rhs = field_for_step(k, std::span<const double>(u));
    rk4_step(x, cfg.dt, k1, k2, k3, k4, tmp, rhs);
    if (!finite_state(x))
      throw DivergenceError(std::move(times), std::move(data), state_dim);
    times.push_back(static_cast<double>(k + 1) * cfg.dt);
    data.insert(data.end(), x.begin(), x.end());
  }
  // Pin the final timestamp so times.back() == t_f exactly.
  times.back() = cfg.t_f;
  return Trajectory(std::move(times), std::move(data), state_dim);
}

}  // namespace

Trajectory simulate_nominal(const NominalModel& model, const ControllerSpec& ctrl,
                            const ScenarioConfig& cfg, std::span<const double> d) {
  return run_closed_loop(
      model.state_dim, ctrl, cfg, d,
      [&](std::size_t, std::span<const double> u) {
        return [&model, u, d](std::span<const double> x, std::span<double> dx) {
          model.field(x, u, d, dx);
        };
      });
}

Trajectory simulate_true(const TrueModel& model, const ControllerSpec& ctrl,
                         const ScenarioConfig& cfg, std::span<const double> d,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-model.disturbance_magnitude,
                                              model.disturbance_magnitude);
  std::vector<double> w(model.disturbance_dim, 0.0);
  return run_closed_loop(
      model.state_dim, ctrl, cfg, d,
      [&](std::size_t, std::span<const double> u) {
        for (double& wi : w)
          wi = model.disturbance_magnitude > 0.0 ? dist(rng) : 0.0;
        return [&model, u, d, &w](std::span<const double> x, std::span<double> dx) {
          model.field(x, u, d, w, dx);
        };
      });
}

}  // namespace specguard
