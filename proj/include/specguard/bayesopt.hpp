#pragma once

#include <functional>
#include <iosfwd>

#include <Eigen/Dense>

#include "specguard/space.hpp"

namespace specguard::bayesopt {

/// Squared-exponential kernel with static (per-run) hyperparameters, in
/// normalized unit-box coordinates.
struct KernelParams {
  std::vector<double> length_scales;  // per dimension; empty = 0.2 everywhere
  double signal_variance = 1.0;
  double jitter = 1e-10;

  double length_scale(std::size_t dim_index) const {
    if (length_scales.empty()) return 0.2;
    return length_scales[dim_index];
  }
};

/// Noiseless GP interpolant over normalized inputs; the kernel matrix is
/// factorized once at fit time.
class GPModel {
public:
  GPModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params);

  std::size_t train_count() const { return static_cast<std::size_t>(inputs_.rows()); }
  const KernelParams& params() const { return params_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }

  /// Posterior (mean, variance) at a normalized query; variance clamped at 0.
  std::pair<double, double> posterior(std::span<const double> z) const;

private:
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  KernelParams params_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // K^-1 y
};

GPModel gp_fit(const std::vector<std::vector<double>>& inputs,
               const std::vector<double>& targets, const KernelParams& params);

/// Expected Improvement for minimization given posterior mean/stddev and the
/// incumbent best. Degenerates to max(best - mean, 0) at zero stddev.
double expected_improvement_value(double mean, double stddev, double best);

double expected_improvement(const GPModel& m, std::span<const double> z, double best);

/// EI maximization: exhaustive enumeration of grid-dimension combinations
/// crossed with seeded multi-start coordinate search on continuous
/// dimensions. Ties (EI within 1e-12) break to the lower posterior mean,
/// then lexicographically. Returns a denormalized configuration.
std::vector<double> propose_next(const GPModel& m, const EnvSpace& space, double best,
                                 std::size_t candidate_budget, std::uint64_t seed);

struct HistoryEntry {
  std::size_t iteration = 0;  // 1-based
  std::vector<double> configuration;
  double value = 0.0;
  double incumbent = 0.0;
  bool penalized = false;  // objective diverged; value is a penalty
};

struct FalsificationResult {
  double h_star = 0.0;
  std::vector<double> d_star;
  std::vector<HistoryEntry> history;
  std::size_t budget_used = 0;
};

struct BoOptions {
  std::size_t budget = 300;
  std::size_t init_count = 10;
  KernelParams params;
  std::uint64_t seed = 0;
  std::size_t candidate_budget = 2000;
  // When set, the signal variance is taken from the sample variance of the
  // initial design (floored at 1e-8) instead of params.signal_variance.
  bool auto_signal_variance = true;
};

using Objective = std::function<double(std::span<const double>)>;
using Observer = std::function<void(const HistoryEntry&)>;

/// Minimizes the objective over the space with EI-driven Bayesian
/// optimization after a stratified initial design. Objective divergence
/// (any thrown Error) is recorded as a penalty value and the loop continues.
/// `resume` replays an existing history prefix instead of re-evaluating it.
FalsificationResult minimize_robustness(const Objective& objective, const EnvSpace& space,
                                        const BoOptions& opts,
                                        const Observer& observer = nullptr,
                                        const std::vector<HistoryEntry>& resume = {});

/// CSV: iteration,d1..dp,value,incumbent,penalized
void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history);
std::vector<HistoryEntry> read_history_csv(std::istream& is);

}  // namespace specguard::bayesopt
