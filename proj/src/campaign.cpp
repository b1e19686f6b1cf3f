#include "specguard/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace specguard {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

}  // namespace

CampaignConfig load_campaign_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }

  CampaignConfig cfg;
  try {
    const auto& model = j.at("model");
    cfg.nominal_name = model.at("nominal").get<std::string>();
    cfg.true_name = model.at("true").get<std::string>();
    cfg.controller_name = model.at("controller").get<std::string>();
    cfg.preset = model.value("preset", std::string("default"));
    cfg.spec_text = j.at("spec").get<std::string>();
    if (j.contains("norm_weights"))
      cfg.norm_weights = j["norm_weights"].get<std::vector<double>>();
    if (j.contains("scenario")) {
      const auto& sc = j["scenario"];
      if (sc.contains("x0")) cfg.x0 = sc["x0"].get<std::vector<double>>();
      if (sc.contains("t_f")) cfg.t_f = sc["t_f"].get<double>();
      if (sc.contains("dt")) cfg.dt = sc["dt"].get<double>();
    }

    const auto& cal = j.at("calibration");
    cfg.calibration.sample_count = cal.at("N").get<std::size_t>();
    cfg.calibration.lambda = cal.at("lambda").get<double>();
    cfg.calibration.seed = cal.at("seed").get<std::uint64_t>();
    std::string mode = cal.value("mode", std::string("sampled-d"));
    if (mode == "sampled-d") {
      cfg.calibration.mode = CalibrationMode::SampledD;
    } else if (mode == "fixed-d") {
      cfg.calibration.mode = CalibrationMode::FixedD;
      cfg.calibration.fixed_d = cal.at("d").get<std::vector<double>>();
    } else {
      throw Error("config: calibration.mode must be sampled-d or fixed-d");
    }

    const auto& bo = j.at("bo");
    cfg.bo.budget = bo.at("budget").get<std::size_t>();
    cfg.bo.init_count = bo.value("init_count", std::size_t{10});
    cfg.bo.seed = bo.at("seed").get<std::uint64_t>();
    cfg.bo.candidate_budget = bo.value("candidate_budget", std::size_t{2000});
    if (bo.contains("length_scale")) {
      // uniform per-dimension scale; expanded once the space is known
      cfg.bo.params.length_scales.assign(1, bo["length_scale"].get<double>());
    }
    if (bo.contains("signal_variance")) {
      cfg.bo.params.signal_variance = bo["signal_variance"].get<double>();
      cfg.bo.auto_signal_variance = false;
    }

    const auto& val = j.at("validation");
    cfg.validation.trials = val.at("K").get<std::size_t>();
    cfg.validation.seed = val.at("seed").get<std::uint64_t>();

    cfg.out_dir = j.value("out", std::string("out"));
  } catch (const nlohmann::json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }

  if (!(cfg.calibration.lambda > 0.0 && cfg.calibration.lambda < 1.0))
    throw Error("config: calibration.lambda must be in (0,1)");
  if (cfg.calibration.sample_count < 1) throw Error("config: calibration.N must be >= 1");
  if (cfg.bo.init_count < 1 || cfg.bo.budget < cfg.bo.init_count)
    throw Error("config: need bo.budget >= bo.init_count >= 1");
  if (cfg.validation.trials < 1) throw Error("config: validation.K must be >= 1");
  return cfg;
}

Campaign::Campaign(const fs::path& config_path, const CampaignOverrides& overrides)
    : config_(load_campaign_config(config_path)) {
  if (overrides.preset) config_.preset = *overrides.preset;
  if (overrides.seed_override) {
    config_.calibration.seed = split_seed(*overrides.seed_override, 1);
    config_.bo.seed = split_seed(*overrides.seed_override, 2);
    config_.validation.seed = split_seed(*overrides.seed_override, 3);
  }
  jobs_ = std::max(1u, overrides.jobs);
  config_.calibration.jobs = jobs_;
  config_.validation.jobs = jobs_;

  // Model registry: the shipped benchmark is the only registered family.
  if (config_.nominal_name != "segway-nominal")
    throw Error("unknown nominal model '" + config_.nominal_name + "' in registry");
  if (config_.true_name != "segway-true")
    throw Error("unknown true model '" + config_.true_name + "' in registry");
  if (config_.controller_name != "segway-waypoint")
    throw Error("unknown controller '" + config_.controller_name + "' in registry");
  scenario_ = benchmark::segway_preset(config_.preset);

  if (config_.x0) scenario_.config.x0 = *config_.x0;
  if (config_.t_f) scenario_.config.t_f = *config_.t_f;
  if (config_.dt) scenario_.config.dt = *config_.dt;
  validate_scenario(scenario_.config);

  norm_ = config_.norm_weights ? WeightedNorm{*config_.norm_weights} : scenario_.norm;
  validate_norm(norm_);

  spec_ = stl::parse_spec(config_.spec_text.empty() ? scenario_.spec_text
                                                    : config_.spec_text);
  if (!stl::certifiable(spec_))
    throw Error("specification '" + spec_.text +
                "' is outside the reach-avoid fragment; the certificate pipeline "
                "accepts only always(pred) or eventually(pred)");

  space_ = benchmark::segway_env_space();
  // Expand a uniform length scale to the space dimension.
  if (config_.bo.params.length_scales.size() == 1)
    config_.bo.params.length_scales.assign(space_.size(),
                                           config_.bo.params.length_scales[0]);

  if (overrides.out) {
    out_dir_ = *overrides.out;
  } else if (const char* env = std::getenv("SPECGUARD_OUT")) {
    out_dir_ = env;
  } else {
    out_dir_ = config_.out_dir;
  }
}

fs::path Campaign::profile_path() const { return out_dir_ / "accuracy_profile.json"; }
fs::path Campaign::history_path() const { return out_dir_ / "falsification_history.csv"; }
fs::path Campaign::certificate_path() const { return out_dir_ / "certificate.json"; }
fs::path Campaign::validation_path() const { return out_dir_ / "validation_report.json"; }

stl::RobustnessMeasure Campaign::measure() const {
  return stl::build_measure(spec_, norm_);
}

void Campaign::calibrate() const {
  fs::create_directories(out_dir_);
  AccuracyProfile profile =
      estimate_accuracy(scenario_.nominal, scenario_.true_model, scenario_.controller,
                        scenario_.config, space_, norm_, config_.calibration);
  write_file(profile_path(), accuracy_profile_to_json(profile));
}

void Campaign::falsify() const {
  fs::create_directories(out_dir_);
  (void)measure();  // fail fast on degenerate spec/norm combinations

  std::vector<bayesopt::HistoryEntry> resume;
  if (fs::exists(history_path())) {
    std::ifstream in(history_path());
    resume = bayesopt::read_history_csv(in);
  }

  auto m = measure();
  auto objective = [&](std::span<const double> d) {
    Trajectory traj = simulate_nominal(scenario_.nominal, scenario_.controller,
                                       scenario_.config, d);
    return stl::robustness(m, traj);
  };

  // The history file is rewritten from scratch and flushed after every
  // iteration so an interrupted run can resume at the last completed one.
  std::ofstream out(history_path(), std::ios::binary);
  if (!out) throw Error("cannot write " + history_path().string());
  out << "iteration";
  for (std::size_t j = 1; j <= space_.size(); ++j) out << ",d" << j;
  out << ",value,incumbent,penalized\n";
  out.precision(17);
  auto observer = [&](const bayesopt::HistoryEntry& e) {
    out << e.iteration;
    for (double v : e.configuration) out << "," << v;
    out << "," << e.value << "," << e.incumbent << "," << (e.penalized ? 1 : 0) << "\n";
    out.flush();
  };

  bayesopt::minimize_robustness(objective, space_, config_.bo, observer, resume);
}

bayesopt::FalsificationResult Campaign::load_result() const {
  if (!fs::exists(history_path()))
    throw Error("missing " + history_path().string() + "; run the falsify stage first");
  std::ifstream in(history_path());
  auto history = bayesopt::read_history_csv(in);
  if (history.empty()) throw Error("empty falsification history");

  bayesopt::FalsificationResult fr;
  fr.history = history;
  fr.budget_used = history.size();
  fr.h_star = std::numeric_limits<double>::infinity();
  for (const auto& e : history)
    if (e.value < fr.h_star) {
      fr.h_star = e.value;
      fr.d_star = e.configuration;
    }
  return fr;
}

Certificate Campaign::certify() const {
  if (!fs::exists(profile_path()))
    throw Error("missing " + profile_path().string() + "; run the calibrate stage first");
  std::string profile_text = read_file(profile_path());
  AccuracyProfile profile = accuracy_profile_from_json(profile_text);
  auto fr = load_result();

  Certificate cert =
      make_certificate(fr, profile, measure(), spec_.text, fnv1a_hex(profile_text),
                       fnv1a_hex(read_file(history_path())));
  write_file(certificate_path(), certificate_to_json(cert));
  return cert;
}

void Campaign::validate() const {
  auto fr = load_result();
  auto m = measure();
  ValidationOptions opts = config_.validation;
  opts.monitored_coordinate = m.pred.coord;
  ValidationReport report =
      validate_empirically(scenario_.true_model, scenario_.controller, scenario_.config,
                           fr.d_star, spec_, m, opts);
  write_file(validation_path(), validation_report_to_json(report));
}

void Campaign::report() const {
  if (!fs::exists(profile_path()))
    throw Error("missing " + profile_path().string() + "; run the calibrate stage first");
  AccuracyProfile profile = accuracy_profile_from_json(read_file(profile_path()));

  // Deviation histogram (calibration samples).
  {
    std::vector<double> finite;
    for (double v : profile.samples_sorted)
      if (std::isfinite(v)) finite.push_back(v);
    double hi = finite.empty() ? 1e-12 : std::max(finite.back(), 1e-12);
    constexpr int kBins = 30;
    std::vector<std::size_t> counts(kBins, 0);
    for (double v : finite) {
      int bin = std::min(kBins - 1, static_cast<int>(v / hi * kBins));
      ++counts[bin];
    }
    std::ostringstream os;
    os.precision(17);
    os << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < kBins; ++b)
      os << (hi * b / kBins) << "," << (hi * (b + 1) / kBins) << "," << counts[b] << "\n";
    write_file(out_dir_ / "deviation_histogram.csv", os.str());
  }

  // Convergence curve (falsification incumbent).
  {
    auto fr = load_result();
    std::ostringstream os;
    os.precision(17);
    os << "iteration,incumbent\n";
    for (const auto& e : fr.history) os << e.iteration << "," << e.incumbent << "\n";
    write_file(out_dir_ / "convergence.csv", os.str());
  }

  // Validation traces of the monitored coordinate.
  if (fs::exists(validation_path())) {
    ValidationReport report = validation_report_from_json(read_file(validation_path()));
    std::ostringstream os;
    os.precision(17);
    os << "trial,t,value\n";
    for (std::size_t k = 0; k < report.monitored_traces.size(); ++k) {
      const auto& trace = report.monitored_traces[k];
      for (std::size_t i = 0; i < trace.size(); ++i)
        os << k << "," << report.trace_times[i] << "," << trace[i] << "\n";
    }
    write_file(out_dir_ / "validation_traces.csv", os.str());
  }
}

int Campaign::run() const {
  calibrate();
  falsify();
  Certificate cert = certify();
  validate();
  report();
  return cert.certified ? 0 : 3;
}

}  // namespace specguard
