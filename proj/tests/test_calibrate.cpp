#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "specguard/benchmark.hpp"
#include "specguard/calibrate.hpp"

using namespace specguard;

namespace {

// Independent sort-and-index reference for the empirical quantile.
double quantile_oracle(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  auto n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));  // 1-indexed
  return samples[rank - 1];
}

}  // namespace

TEST_CASE("empirical_quantile examples") {
  std::vector<double> ladder(100);
  for (int i = 0; i < 100; ++i) ladder[i] = static_cast<double>(i + 1);
  CHECK(empirical_quantile(ladder, 0.95) == 95.0);

  CHECK(empirical_quantile({7.0}, 0.01) == 7.0);
  CHECK(empirical_quantile({7.0}, 0.99) == 7.0);
  CHECK(empirical_quantile({3.0, 3.0, 3.0}, 0.5) == 3.0);

  CHECK_THROWS_AS(empirical_quantile({}, 0.5), Error);
  CHECK_THROWS_AS(empirical_quantile({1.0}, 0.0), Error);
  CHECK_THROWS_AS(empirical_quantile({1.0}, 1.0), Error);
}

TEST_CASE("empirical_quantile matches the sort-and-index oracle") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  std::uniform_real_distribution<double> quant(0.01, 0.99);
  std::uniform_int_distribution<int> dup(0, 2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> samples(size(rng));
    for (double& s : samples) s = value(rng);
    // Inject ties so the multiset case is exercised.
    if (samples.size() > 2 && dup(rng) == 0) samples[1] = samples[0];
    double q = quant(rng);
    CHECK(empirical_quantile(samples, q) == quantile_oracle(samples, q));
  }
}

TEST_CASE("quantile of synthetic Uniform[0,1] deviations") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> samples(2000);
  for (double& s : samples) s = unit(rng);
  double eps = empirical_quantile(samples, 0.95);
  CHECK(eps >= 0.93);
  CHECK(eps <= 0.97);
}

TEST_CASE("lambda monotonicity on fixed samples") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> value(0.0, 5.0);
  std::vector<double> samples(57);
  for (double& s : samples) s = value(rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.01, 0.05, 0.1, 0.25, 0.5}) {
    double eps = empirical_quantile(samples, 1.0 - lambda);
    CHECK(eps <= prev);
    prev = eps;
  }
}

TEST_CASE("estimate_accuracy") {
  auto s = benchmark::segway_models(0.2);
  auto space = benchmark::segway_env_space();
  CalibrationOptions opts;
  opts.sample_count = 40;
  opts.lambda = 0.05;
  opts.seed = 11;
  opts.jobs = 2;
  // Shorter horizon keeps the suite fast; the contract is horizon-agnostic.
  auto cfg = s.config;
  cfg.t_f = 3.0;

  SUBCASE("zero-disturbance twin calibrates to epsilon = 0") {
    auto zero = benchmark::segway_models(0.0);
    auto prof = estimate_accuracy(zero.nominal, zero.true_model, zero.controller,
                                  cfg, space, zero.norm, opts);
    CHECK(prof.epsilon == 0.0);
    CHECK(prof.divergences == 0);
  }

  auto prof = estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                space, s.norm, opts);

  SUBCASE("profile invariants") {
    CHECK(prof.sample_count == 40);
    CHECK(prof.lambda == 0.05);
    CHECK(prof.t_f == 3.0);
    CHECK(prof.variance_bound == 1.0 / 40.0);
    CHECK(prof.samples_sorted.size() == 40);
    CHECK(std::is_sorted(prof.samples_sorted.begin(), prof.samples_sorted.end()));
    // epsilon is the ceil((1-lambda)N)-th order statistic of the samples.
    CHECK(prof.epsilon == quantile_oracle(prof.samples_sorted, 0.95));
    // At least (1-lambda)N of the retained samples are <= epsilon.
    auto below = std::count_if(prof.samples_sorted.begin(), prof.samples_sorted.end(),
                               [&](double v) { return v <= prof.epsilon; });
    CHECK(static_cast<double>(below) >= 0.95 * 40.0);
    CHECK(prof.epsilon > 0.0);
  }

  SUBCASE("seed reproducibility, schedule independence") {
    auto again = estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                   space, s.norm, opts);
    CHECK(again.epsilon == prof.epsilon);
    CHECK(again.samples_sorted == prof.samples_sorted);
    auto serial = opts;
    serial.jobs = 1;
    auto one_thread = estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                        space, s.norm, serial);
    CHECK(one_thread.samples_sorted == prof.samples_sorted);
    auto other = opts;
    other.seed = 12;
    auto different = estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                       space, s.norm, other);
    CHECK(different.samples_sorted != prof.samples_sorted);
  }

  SUBCASE("fixed-d mode uses the pinned configuration") {
    auto fixed = opts;
    fixed.mode = CalibrationMode::FixedD;
    fixed.fixed_d = std::vector<double>{4.0, 5.0, 1.0, 2.0, 4.885};
    auto fprof = estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                   space, s.norm, fixed);
    CHECK(fprof.sample_count == 40);
    CHECK(fprof.epsilon > 0.0);
    auto missing = opts;
    missing.mode = CalibrationMode::FixedD;
    CHECK_THROWS_AS(estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                      space, s.norm, missing),
                    Error);
  }

  SUBCASE("invalid options") {
    auto bad = opts;
    bad.sample_count = 0;
    CHECK_THROWS_AS(estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                      space, s.norm, bad),
                    Error);
    bad = opts;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                      space, s.norm, bad),
                    Error);
    bad = opts;
    bad.lambda = 1.0;
    CHECK_THROWS_AS(estimate_accuracy(s.nominal, s.true_model, s.controller, cfg,
                                      space, s.norm, bad),
                    Error);
  }

  SUBCASE("JSON round trip") {
    auto text = accuracy_profile_to_json(prof);
    auto back = accuracy_profile_from_json(text);
    CHECK(back.epsilon == prof.epsilon);
    CHECK(back.lambda == prof.lambda);
    CHECK(back.t_f == prof.t_f);
    CHECK(back.sample_count == prof.sample_count);
    CHECK(back.norm.weights == prof.norm.weights);
    CHECK(back.samples_sorted == prof.samples_sorted);
    CHECK(back.divergences == prof.divergences);
    CHECK(back.variance_bound == prof.variance_bound);
  }
}

TEST_CASE("divergent runs enter as +infinity") {
  // A true twin that blows up for some configurations.
  NominalModel nom;
  nom.state_dim = 1;
  nom.input_dim = 1;
  nom.field = [](std::span<const double> x, std::span<const double>,
                 std::span<const double>, std::span<double> dx) { dx[0] = -x[0]; };
  TrueModel tru;
  tru.state_dim = 1;
  tru.input_dim = 1;
  tru.disturbance_dim = 1;
  tru.disturbance_magnitude = 1.0;
  tru.field = [](std::span<const double> x, std::span<const double>,
                 std::span<const double> d, std::span<const double>,
                 std::span<double> dx) {
    // Blows up when the sampled configuration is in the upper half.
    dx[0] = d[0] > 0.5 ? x[0] * x[0] * 1e3 + 1e3 : -x[0];
  };
  ControllerSpec ctrl;
  ctrl.input_dim = 1;
  ctrl.input_lo = {-1.0};
  ctrl.input_hi = {1.0};
  ctrl.feedback = [](double, std::span<const double>, std::span<const double>,
                     std::span<double> u) { u[0] = 0.0; };
  ScenarioConfig cfg{{1.0}, 2.0, 0.01};
  EnvSpace space;
  EnvDim dim;
  dim.kind = EnvDim::Kind::Continuous;
  dim.lo = 0.0;
  dim.hi = 1.0;
  space.dims = {dim};

  CalibrationOptions opts;
  opts.sample_count = 30;
  opts.lambda = 0.05;
  opts.seed = 5;
  auto prof = estimate_accuracy(nom, tru, ctrl, cfg, space, WeightedNorm{{1.0}}, opts);
  CHECK(prof.divergences > 0);
  CHECK(std::isinf(prof.samples_sorted.back()));
  CHECK(std::isinf(prof.epsilon));  // ~half diverge, far above the 5% budget

  SUBCASE("infinities survive the JSON round trip") {
    auto back = accuracy_profile_from_json(accuracy_profile_to_json(prof));
    CHECK(std::isinf(back.epsilon));
    CHECK(back.samples_sorted == prof.samples_sorted);
  }
}
