#pragma once

#include <optional>
#include <string>

#include "specguard/bayesopt.hpp"
#include "specguard/calibrate.hpp"
#include "specguard/stl.hpp"

namespace specguard {

/// Probabilistic verification verdict: certified iff h* >= L * epsilon
/// (exact comparison); when certified, the true system satisfies the spec
/// with probability at least 1 - lambda, conditional on the recorded
/// assumptions.
struct Certificate {
  bool certified = false;
  std::optional<double> probability;  // 1 - lambda, present iff certified
  double h_star = 0.0;
  double lipschitz_constant = 1.0;
  double epsilon = 0.0;
  double lambda = 0.0;
  double margin = 0.0;  // h_star - L * epsilon
  std::string spec_text;
  std::vector<double> norm_weights;
  std::vector<std::string> assumptions;
  std::string accuracy_profile_ref;  // content hash of the stored profile
  std::string falsification_ref;     // content hash of the stored history
  std::string created_at;
};

/// Applies the certificate condition. The profile and the measure must carry
/// the same norm; this compatibility precondition is
/// enforced, not assumed.
Certificate make_certificate(const bayesopt::FalsificationResult& fr,
                             const AccuracyProfile& ap, const stl::RobustnessMeasure& m,
                             const std::string& spec_text,
                             const std::string& accuracy_profile_ref = "",
                             const std::string& falsification_ref = "");

std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text);

struct ValidationReport {
  std::size_t trials = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> robustness_values;
  std::vector<bool> satisfied;
  double satisfaction_rate = 0.0;
  double min_robustness = 0.0;  // sampled stand-in for the true worst case
  // Monitored-coordinate traces for plotting; one row per trial.
  std::vector<double> trace_times;
  std::vector<std::vector<double>> monitored_traces;
};

struct ValidationOptions {
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::size_t monitored_coordinate = 0;
};

/// K independent seeded true-system rollouts at the worst-case
/// configuration; divergence counts as a violating trial.
ValidationReport validate_empirically(const TrueModel& true_sys, const ControllerSpec& ctrl,
                                      const ScenarioConfig& cfg, std::span<const double> d_star,
                                      const stl::Spec& spec, const stl::RobustnessMeasure& m,
                                      const ValidationOptions& opts);

std::string validation_report_to_json(const ValidationReport& r);
ValidationReport validation_report_from_json(const std::string& text);

}  // namespace specguard
