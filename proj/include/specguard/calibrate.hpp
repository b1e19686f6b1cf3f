#pragma once

#include <optional>
#include <string>

#include "specguard/space.hpp"
#include "specguard/systems.hpp"

namespace specguard {

/// Result of accuracy calibration: the nominal model tracks the true system
/// within epsilon (in the given norm, over [0, t_f]) on at least a (1-lambda)
/// fraction of the sampled runs. Epsilon is an empirical-quantile estimate
/// from sampled configurations, not a uniform-in-d guarantee.
struct AccuracyProfile {
  double epsilon = 0.0;
  double lambda = 0.0;
  double t_f = 0.0;
  std::size_t sample_count = 0;
  WeightedNorm norm;
  std::vector<double> samples_sorted;  // retained deviations, ascending; +inf for divergences
  std::size_t divergences = 0;
  double variance_bound = 0.0;         // 1/N estimator-variance metadata
};

/// ceil(q*N)-th order statistic (1-indexed after ascending sort).
double empirical_quantile(std::vector<double> samples, double q);

enum class CalibrationMode { SampledD, FixedD };

struct CalibrationOptions {
  std::size_t sample_count = 300;
  double lambda = 0.05;
  std::uint64_t seed = 0;
  CalibrationMode mode = CalibrationMode::SampledD;
  std::optional<std::vector<double>> fixed_d;  // required for FixedD
  unsigned jobs = 1;
};

/// Monte-Carlo accuracy estimation: N matched nominal/true simulation pairs,
/// deviation in the sup norm, epsilon = empirical (1-lambda)-quantile.
/// Deterministic given the seed; divergent runs enter as +inf.
AccuracyProfile estimate_accuracy(const NominalModel& nominal, const TrueModel& true_sys,
                                  const ControllerSpec& ctrl, const ScenarioConfig& cfg,
                                  const EnvSpace& space, const WeightedNorm& nrm,
                                  const CalibrationOptions& opts);

std::string accuracy_profile_to_json(const AccuracyProfile& p);
AccuracyProfile accuracy_profile_from_json(const std::string& text);

}  // namespace specguard
