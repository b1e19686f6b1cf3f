#include "specguard/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace specguard {

double empirical_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw Error("empirical_quantile: no samples");
  if (!(q > 0.0 && q < 1.0)) throw Error("empirical_quantile: q must be in (0,1)");
  std::sort(samples.begin(), samples.end());
  auto n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));  // 1-indexed
  rank = std::max<std::size_t>(rank, 1);
  return samples[rank - 1];
}

AccuracyProfile estimate_accuracy(const NominalModel& nominal, const TrueModel& true_sys,
                                  const ControllerSpec& ctrl, const ScenarioConfig& cfg,
                                  const EnvSpace& space, const WeightedNorm& nrm,
                                  const CalibrationOptions& opts) {
  if (opts.sample_count < 1) throw Error("estimate_accuracy: N must be >= 1");
  if (!(opts.lambda > 0.0 && opts.lambda < 1.0))
    throw Error("estimate_accuracy: lambda must be in (0,1)");
  validate_space(space);
  validate_norm(nrm);
  validate_scenario(cfg);
  if (opts.mode == CalibrationMode::FixedD) {
    if (!opts.fixed_d) throw Error("estimate_accuracy: fixed-d mode needs a configuration");
    if (!contains(space, *opts.fixed_d))
      throw Error("estimate_accuracy: fixed d is outside the environment space");
  }

  const std::size_t n = opts.sample_count;
  std::vector<double> deviations(n, 0.0);
  std::size_t divergences = 0;
  std::mutex div_mutex;

  auto run_one = [&](std::size_t k) {
    // Each pair derives its own streams from (seed, k), so the result is
    // independent of execution order.
    std::mt19937_64 cfg_rng(split_seed(opts.seed, 2 * k));
    std::vector<double> d = opts.mode == CalibrationMode::FixedD
                                ? *opts.fixed_d
                                : sample_uniform(space, cfg_rng);
    try {
      Trajectory nom = simulate_nominal(nominal, ctrl, cfg, d);
      Trajectory tru = simulate_true(true_sys, ctrl, cfg, d, split_seed(opts.seed, 2 * k + 1));
      deviations[k] = sup_deviation(nom, tru, nrm);
    } catch (const DivergenceError&) {
      deviations[k] = std::numeric_limits<double>::infinity();
      std::lock_guard<std::mutex> lock(div_mutex);
      ++divergences;
    }
  };

  unsigned jobs = std::max(1u, opts.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) run_one(k);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < jobs; ++t)
      workers.emplace_back([&] {
        for (std::size_t k = next.fetch_add(1); k < n; k = next.fetch_add(1)) run_one(k);
      });
    for (auto& w : workers) w.join();
  }

  AccuracyProfile profile;
  profile.lambda = opts.lambda;
  profile.t_f = cfg.t_f;
  profile.sample_count = n;
  profile.norm = nrm;
  profile.samples_sorted = deviations;
  std::sort(profile.samples_sorted.begin(), profile.samples_sorted.end());
  profile.divergences = divergences;
  profile.variance_bound = 1.0 / static_cast<double>(n);
  profile.epsilon = empirical_quantile(deviations, 1.0 - opts.lambda);
  return profile;
}

std::string accuracy_profile_to_json(const AccuracyProfile& p) {
  nlohmann::json j;
  j["epsilon"] = p.epsilon;
  j["lambda"] = p.lambda;
  j["t_f"] = p.t_f;
  j["N"] = p.sample_count;
  j["norm_weights"] = p.norm.weights;
  // JSON has no infinity; divergent samples serialize as null.
  nlohmann::json samples = nlohmann::json::array();
  for (double v : p.samples_sorted)
    samples.push_back(std::isinf(v) ? nlohmann::json() : nlohmann::json(v));
  j["samples_sorted"] = std::move(samples);
  j["divergences"] = p.divergences;
  j["variance_bound"] = p.variance_bound;
  return j.dump(2) + "\n";
}

AccuracyProfile accuracy_profile_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AccuracyProfile p;
  const auto& eps = j.at("epsilon");
  // Non-finite doubles dump as null.
  p.epsilon = eps.is_null() ? std::numeric_limits<double>::infinity() : eps.get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.t_f = j.at("t_f").get<double>();
  p.sample_count = j.at("N").get<std::size_t>();
  p.norm.weights = j.at("norm_weights").get<std::vector<double>>();
  for (const auto& v : j.at("samples_sorted"))
    p.samples_sorted.push_back(v.is_null() ? std::numeric_limits<double>::infinity()
                                           : v.get<double>());
  p.divergences = j.at("divergences").get<std::size_t>();
  p.variance_bound = j.at("variance_bound").get<double>();
  return p;
}

}  // namespace specguard
