#include <iostream>

#include <CLI11.hpp>

#include "specguard/campaign.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::string preset;
  unsigned jobs = 1;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "campaign configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory (overrides config and SPECGUARD_OUT)");
  cmd->add_option("--jobs", args.jobs, "worker threads for parallel stages")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--preset", args.preset, "benchmark preset (default|stress)");
  cmd->add_option("--seed-override", args.seed_override,
                  "master seed replacing all per-stage seeds")
      ->each([&](const std::string&) { args.has_seed_override = true; });
}

specguard::Campaign make_campaign(const CommonArgs& args) {
  specguard::CampaignOverrides overrides;
  if (!args.out.empty()) overrides.out = args.out;
  if (!args.preset.empty()) overrides.preset = args.preset;
  if (args.has_seed_override) overrides.seed_override = args.seed_override;
  overrides.jobs = args.jobs;
  return specguard::Campaign(args.config_path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic reach-avoid verification of black-box closed-loop systems"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* run = app.add_subcommand("run", "full pipeline: calibrate, falsify, certify, validate, report");
  auto* calibrate = app.add_subcommand("calibrate", "estimate simulator accuracy (epsilon)");
  auto* falsify = app.add_subcommand("falsify", "minimize nominal robustness over configurations");
  auto* certify = app.add_subcommand("certify", "apply the certificate condition to stored artifacts");
  auto* validate = app.add_subcommand("validate", "rollouts of the true system at the worst case");
  auto* report = app.add_subcommand("report", "regenerate plot CSVs from stored artifacts");
  for (auto* cmd : {run, calibrate, falsify, certify, validate, report})
    add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    auto campaign = make_campaign(args);
    if (run->parsed()) return campaign.run();
    if (calibrate->parsed()) campaign.calibrate();
    if (falsify->parsed()) campaign.falsify();
    if (certify->parsed()) {
      auto cert = campaign.certify();
      std::cout << (cert.certified
                        ? "certified with probability " + std::to_string(*cert.probability)
                        : "not certified")
                << " (h* = " << cert.h_star << ", L*epsilon = "
                << cert.lipschitz_constant * cert.epsilon << ")\n";
      return cert.certified ? 0 : 3;
    }
    if (validate->parsed()) campaign.validate();
    if (report->parsed()) campaign.report();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "specguard: " << e.what() << "\n";
    return 1;
  }
}
