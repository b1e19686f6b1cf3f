#include <doctest.h>

#include <cmath>

#include "specguard/systems.hpp"

using namespace specguard;

namespace {

ControllerSpec no_controller() {
  ControllerSpec c;
  c.input_dim = 1;
  c.input_lo = {-10.0};
  c.input_hi = {10.0};
  c.feedback = [](double, std::span<const double>, std::span<const double>,
                  std::span<double> u) { u[0] = 0.0; };
  return c;
}

NominalModel decay_model() {
  NominalModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.field = [](std::span<const double> x, std::span<const double>,
               std::span<const double>, std::span<double> dx) { dx[0] = -x[0]; };
  return m;
}

}  // namespace

TEST_CASE("simulate_nominal") {
  ScenarioConfig cfg{{1.0}, 1.0, 0.01};
  std::vector<double> d;

  SUBCASE("zero vector field holds the initial state") {
    NominalModel still;
    still.state_dim = 1;
    still.input_dim = 1;
    still.field = [](std::span<const double>, std::span<const double>,
                     std::span<const double>, std::span<double> dx) { dx[0] = 0.0; };
    auto traj = simulate_nominal(still, no_controller(), cfg, d);
    for (std::size_t i = 0; i < traj.size(); ++i) CHECK(traj.state(i)[0] == 1.0);
  }

  SUBCASE("linear decay matches the closed form") {
    auto traj = simulate_nominal(decay_model(), no_controller(), cfg, d);
    CHECK(traj.size() == 101);
    CHECK(traj.final_time() == 1.0);
    CHECK(std::abs(traj.state(100)[0] - std::exp(-1.0)) < 1e-6);
  }

  SUBCASE("deterministic: identical calls are bit-identical") {
    auto a = simulate_nominal(decay_model(), no_controller(), cfg, d);
    auto b = simulate_nominal(decay_model(), no_controller(), cfg, d);
    CHECK(a == b);
  }

  SUBCASE("divergence carries the finite prefix") {
    NominalModel blowup;
    blowup.state_dim = 1;
    blowup.input_dim = 1;
    blowup.field = [](std::span<const double> x, std::span<const double>,
                      std::span<const double>, std::span<double> dx) {
      dx[0] = x[0] * x[0];
    };
    ScenarioConfig hot{{5.0}, 2.0, 0.01};
    try {
      simulate_nominal(blowup, no_controller(), hot, d);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(!e.prefix_times.empty());
      CHECK(e.prefix_times.front() == 0.0);
      for (double v : e.prefix_data) CHECK(std::isfinite(v));
    }
  }

  SUBCASE("invalid scenario configs") {
    CHECK_THROWS_AS(simulate_nominal(decay_model(), no_controller(),
                                     ScenarioConfig{{1.0}, -1.0, 0.01}, d),
                    Error);
    CHECK_THROWS_AS(simulate_nominal(decay_model(), no_controller(),
                                     ScenarioConfig{{1.0}, 1.0, 0.3}, d),
                    Error);  // t_f/dt not an integer
  }
}

TEST_CASE("RK4 is 4th order on the linear test problem") {
  std::vector<double> d;
  auto endpoint_error = [&](double dt) {
    ScenarioConfig cfg{{1.0}, 1.0, dt};
    auto traj = simulate_nominal(decay_model(), no_controller(), cfg, d);
    return std::abs(traj.state(traj.size() - 1)[0] - std::exp(-1.0));
  };
  double coarse = endpoint_error(0.1);
  double fine = endpoint_error(0.05);
  double ratio = coarse / fine;
  CHECK(ratio > 8.0);   // 16x within a factor of 2
  CHECK(ratio < 32.0);
}

TEST_CASE("simulate_true") {
  ScenarioConfig cfg{{1.0}, 1.0, 0.01};
  std::vector<double> d;

  TrueModel twin;
  twin.state_dim = 1;
  twin.input_dim = 1;
  twin.disturbance_dim = 1;
  twin.field = [](std::span<const double> x, std::span<const double>,
                  std::span<const double>, std::span<const double> w,
                  std::span<double> dx) { dx[0] = -x[0] + w[0]; };

  SUBCASE("zero magnitude equals the nominal run exactly") {
    twin.disturbance_magnitude = 0.0;
    auto nom = simulate_nominal(decay_model(), no_controller(), cfg, d);
    auto tru = simulate_true(twin, no_controller(), cfg, d, 42);
    CHECK(nom == tru);
  }

  SUBCASE("same seed is bit-identical, different seeds differ") {
    twin.disturbance_magnitude = 0.5;
    auto a = simulate_true(twin, no_controller(), cfg, d, 7);
    auto b = simulate_true(twin, no_controller(), cfg, d, 7);
    auto c = simulate_true(twin, no_controller(), cfg, d, 8);
    CHECK(a == b);
    CHECK(sup_deviation(a, c, WeightedNorm{{1.0}}) > 0.0);
  }
}

TEST_CASE("control clamping keeps inputs inside the box") {
  NominalModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.field = [](std::span<const double>, std::span<const double> u,
               std::span<const double>, std::span<double> dx) {
    CHECK(u[0] >= -1.0);
    CHECK(u[0] <= 1.0);
    dx[0] = u[0];
  };
  ControllerSpec wild;
  wild.input_dim = 1;
  wild.input_lo = {-1.0};
  wild.input_hi = {1.0};
  wild.feedback = [](double t, std::span<const double>, std::span<const double>,
                     std::span<double> u) { u[0] = 100.0 * std::sin(10.0 * t); };
  ScenarioConfig cfg{{0.0}, 1.0, 0.01};
  std::vector<double> d;
  simulate_nominal(m, wild, cfg, d);
}
