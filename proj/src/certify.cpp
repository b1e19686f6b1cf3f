#include "specguard/certify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <thread>

#include <json.hpp>

namespace specguard {

namespace {

// Artifact files must reproduce bit-for-bit across reruns, so the timestamp
// honors SOURCE_DATE_EPOCH and otherwise pins the epoch origin.
std::string artifact_timestamp() {
  std::time_t epoch = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"))
    epoch = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  char buf[32];
  std::tm tm{};
  gmtime_r(&epoch, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Certificate make_certificate(const bayesopt::FalsificationResult& fr,
                             const AccuracyProfile& ap, const stl::RobustnessMeasure& m,
                             const std::string& spec_text,
                             const std::string& accuracy_profile_ref,
                             const std::string& falsification_ref) {
  if (ap.norm != m.norm)
    throw Error(
        "certify: the accuracy profile and the robustness measure use different "
        "norms; the certificate requires accuracy with respect to the same norm "
        "under which the measure is Lipschitz");

  Certificate c;
  c.h_star = fr.h_star;
  c.lipschitz_constant = m.lipschitz_constant;
  c.epsilon = ap.epsilon;
  c.lambda = ap.lambda;
  c.margin = fr.h_star - m.lipschitz_constant * ap.epsilon;
  c.certified = fr.h_star >= m.lipschitz_constant * ap.epsilon;
  if (c.certified) c.probability = 1.0 - ap.lambda;
  c.spec_text = spec_text;
  c.norm_weights = m.norm.weights;
  c.assumptions = {
      "epsilon is an empirical-quantile estimate from sampled configurations, "
      "not a uniform-in-d guarantee",
      "trajectories are sampled on a fixed grid; the sup over continuous time "
      "is approximated by the max over samples",
      "the disturbance model of the stochastic twin is a configured stand-in "
      "for the unknown environment distribution",
      "h_star is the incumbent of a finite-budget Bayesian optimization run "
      "and is assumed to estimate the global minimum",
  };
  c.accuracy_profile_ref = accuracy_profile_ref;
  c.falsification_ref = falsification_ref;
  c.created_at = artifact_timestamp();
  return c;
}

std::string certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["certified"] = c.certified;
  if (c.probability) j["probability"] = *c.probability;
  j["h_star"] = c.h_star;
  j["L"] = c.lipschitz_constant;
  j["epsilon"] = c.epsilon;
  j["lambda"] = c.lambda;
  j["margin"] = c.margin;
  j["spec_text"] = c.spec_text;
  j["norm_weights"] = c.norm_weights;
  j["assumptions"] = c.assumptions;
  j["accuracy_profile_ref"] = c.accuracy_profile_ref;
  j["falsification_ref"] = c.falsification_ref;
  j["created_at"] = c.created_at;
  return j.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Certificate c;
  c.certified = j.at("certified").get<bool>();
  if (j.contains("probability")) c.probability = j["probability"].get<double>();
  c.h_star = j.at("h_star").get<double>();
  c.lipschitz_constant = j.at("L").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.margin = j.at("margin").get<double>();
  c.spec_text = j.at("spec_text").get<std::string>();
  c.norm_weights = j.at("norm_weights").get<std::vector<double>>();
  c.assumptions = j.at("assumptions").get<std::vector<std::string>>();
  c.accuracy_profile_ref = j.at("accuracy_profile_ref").get<std::string>();
  c.falsification_ref = j.at("falsification_ref").get<std::string>();
  c.created_at = j.at("created_at").get<std::string>();
  return c;
}

ValidationReport validate_empirically(const TrueModel& true_sys, const ControllerSpec& ctrl,
                                      const ScenarioConfig& cfg, std::span<const double> d_star,
                                      const stl::Spec& spec, const stl::RobustnessMeasure& m,
                                      const ValidationOptions& opts) {
  if (opts.trials < 1) throw Error("validate_empirically: K must be >= 1");

  ValidationReport report;
  report.trials = opts.trials;
  report.seeds.resize(opts.trials);
  report.robustness_values.assign(opts.trials, 0.0);
  report.monitored_traces.assign(opts.trials, {});
  for (std::size_t k = 0; k < opts.trials; ++k)
    report.seeds[k] = split_seed(opts.seed, k);

  // vector<bool> is bit-packed; collect flags in a byte vector so trials can
  // run concurrently.
  std::vector<char> sat_flags(opts.trials, 0);
  std::vector<double> d(d_star.begin(), d_star.end());
  auto run_one = [&](std::size_t k) {
    try {
      Trajectory traj = simulate_true(true_sys, ctrl, cfg, d, report.seeds[k]);
      report.robustness_values[k] = stl::robustness(m, traj);
      sat_flags[k] = stl::satisfies(spec, traj) ? 1 : 0;
      std::vector<double>& trace = report.monitored_traces[k];
      trace.resize(traj.size());
      for (std::size_t i = 0; i < traj.size(); ++i)
        trace[i] = traj.state(i)[opts.monitored_coordinate];
      if (k == 0) report.trace_times = traj.times();
    } catch (const DivergenceError&) {
      report.robustness_values[k] = -std::numeric_limits<double>::infinity();
      sat_flags[k] = 0;
    }
  };

  unsigned jobs = std::max(1u, opts.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < opts.trials; ++k) run_one(k);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < jobs; ++t)
      workers.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < opts.trials; k = next.fetch_add(1))
          run_one(k);
      });
    for (auto& w : workers) w.join();
  }

  report.satisfied.assign(sat_flags.begin(), sat_flags.end());
  std::size_t satisfied_count = 0;
  for (bool ok : report.satisfied)
    if (ok) ++satisfied_count;
  report.satisfaction_rate =
      static_cast<double>(satisfied_count) / static_cast<double>(opts.trials);
  report.min_robustness =
      *std::min_element(report.robustness_values.begin(), report.robustness_values.end());
  return report;
}

std::string validation_report_to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["trials"] = r.trials;
  j["seeds"] = r.seeds;
  nlohmann::json rob = nlohmann::json::array();
  for (double v : r.robustness_values)
    rob.push_back(std::isinf(v) ? nlohmann::json() : nlohmann::json(v));
  j["robustness"] = std::move(rob);
  j["satisfied"] = r.satisfied;
  j["rate"] = r.satisfaction_rate;
  j["min_robustness"] = std::isinf(r.min_robustness)
                            ? nlohmann::json()
                            : nlohmann::json(r.min_robustness);
  j["trace_times"] = r.trace_times;
  j["monitored_traces"] = r.monitored_traces;
  return j.dump() + "\n";
}

ValidationReport validation_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ValidationReport r;
  r.trials = j.at("trials").get<std::size_t>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& v : j.at("robustness"))
    r.robustness_values.push_back(v.is_null() ? -std::numeric_limits<double>::infinity()
                                              : v.get<double>());
  r.satisfied = j.at("satisfied").get<std::vector<bool>>();
  r.satisfaction_rate = j.at("rate").get<double>();
  r.min_robustness = j.at("min_robustness").is_null()
                         ? -std::numeric_limits<double>::infinity()
                         : j["min_robustness"].get<double>();
  r.trace_times = j.at("trace_times").get<std::vector<double>>();
  r.monitored_traces = j.at("monitored_traces").get<std::vector<std::vector<double>>>();
  return r;
}

}  // namespace specguard
