#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "specguard/benchmark.hpp"
#include "specguard/certify.hpp"

namespace specguard {

/// Parsed campaign configuration. All randomness derives from the seeds
/// recorded here; there is no wall-clock seeding.
struct CampaignConfig {
  std::string nominal_name;
  std::string true_name;
  std::string controller_name;
  std::string preset = "default";
  std::string spec_text;
  std::optional<std::vector<double>> norm_weights;  // default: preset norm
  std::optional<std::vector<double>> x0;
  std::optional<double> t_f;
  std::optional<double> dt;
  CalibrationOptions calibration;
  bayesopt::BoOptions bo;
  ValidationOptions validation;
  std::string out_dir = "out";
};

CampaignConfig load_campaign_config(const std::filesystem::path& path);

struct CampaignOverrides {
  std::optional<std::string> out;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed_override;  // master seed replacing all stage seeds
  unsigned jobs = 1;
};

/// A resolved campaign: config + registry-resolved models + output paths.
class Campaign {
public:
  Campaign(const std::filesystem::path& config_path, const CampaignOverrides& overrides);

  void calibrate() const;
  void falsify() const;  // resumes from an existing partial history
  Certificate certify() const;
  void validate() const;
  void report() const;

  /// calibrate -> falsify -> certify -> validate -> report.
  /// Returns 0 when certified, 3 when not certified.
  int run() const;

  const CampaignConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_dir_; }

  std::filesystem::path profile_path() const;
  std::filesystem::path history_path() const;
  std::filesystem::path certificate_path() const;
  std::filesystem::path validation_path() const;

private:
  stl::RobustnessMeasure measure() const;
  bayesopt::FalsificationResult load_result() const;

  CampaignConfig config_;
  benchmark::SegwayScenario scenario_;
  WeightedNorm norm_;
  stl::Spec spec_;
  EnvSpace space_;
  std::filesystem::path out_dir_;
  unsigned jobs_ = 1;
};

}  // namespace specguard
