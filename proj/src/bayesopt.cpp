#include "specguard/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace specguard::bayesopt {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kDuplicateTolerance = 1e-12;

Eigen::VectorXd to_vector(std::span<const double> z) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) v[static_cast<Eigen::Index>(i)] = z[i];
  return v;
}

std::string list_duplicates(const Eigen::MatrixXd& X) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = i + 1; j < X.rows(); ++j)
      if ((X.row(i) - X.row(j)).squaredNorm() < kDuplicateTolerance)
        os << " (" << i << "," << j << ")";
  return os.str();
}

}  // namespace

GPModel::GPModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), params_(std::move(params)) {
  const Eigen::Index n = inputs_.rows();
  if (n < 1 || targets_.size() != n)
    throw Error("gp_fit: need |X| == |y| >= 1");
  if (!params_.length_scales.empty() &&
      params_.length_scales.size() != static_cast<std::size_t>(inputs_.cols()))
    throw Error("gp_fit: length-scale count does not match input dimension");

  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      K(i, j) = K(j, i) = kernel(inputs_.row(i), inputs_.row(j));

  double jitter = params_.jitter;
  while (true) {
    Eigen::MatrixXd Kj = K + jitter * Eigen::MatrixXd::Identity(n, n);
    llt_.compute(Kj);
    if (llt_.info() == Eigen::Success) break;
    jitter *= 10.0;
    if (jitter > 1e-6)
      throw Error("gp_fit: kernel matrix factorization failed; duplicate inputs:" +
                  list_duplicates(inputs_));
  }
  alpha_ = llt_.solve(targets_);
}

double GPModel::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double q = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double l = params_.length_scale(static_cast<std::size_t>(i));
    double diff = (a[i] - b[i]) / l;
    q += diff * diff;
  }
  return params_.signal_variance * std::exp(-0.5 * q);
}

std::pair<double, double> GPModel::posterior(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(inputs_.cols()))
    throw Error("gp_posterior: query dimension mismatch");
  Eigen::VectorXd q = to_vector(z);
  const Eigen::Index n = inputs_.rows();
  Eigen::VectorXd kstar(n);
  for (Eigen::Index i = 0; i < n; ++i) kstar[i] = kernel(inputs_.row(i), q);
  double mean = kstar.dot(alpha_);
  Eigen::VectorXd v = llt_.matrixL().solve(kstar);
  double var = params_.signal_variance - v.squaredNorm();
  // Residual variance at training points is pure jitter; treat it as zero so
  // EI vanishes exactly at evaluated inputs.
  if (var < 1e-8) var = 0.0;
  return {mean, var};
}

GPModel gp_fit(const std::vector<std::vector<double>>& inputs,
               const std::vector<double>& targets, const KernelParams& params) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw Error("gp_fit: need |X| == |y| >= 1");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(inputs.size()),
                    static_cast<Eigen::Index>(inputs[0].size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != inputs[0].size())
      throw Error("gp_fit: ragged input matrix");
    for (std::size_t j = 0; j < inputs[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inputs[i][j];
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = targets[i];
  // Exact duplicates with conflicting targets can never factorize to a
  // consistent interpolant; report them up front.
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      double dist = 0.0;
      for (std::size_t k = 0; k < inputs[i].size(); ++k) {
        double diff = inputs[i][k] - inputs[j][k];
        dist += diff * diff;
      }
      if (dist < kDuplicateTolerance && std::abs(targets[i] - targets[j]) > 1e-12)
        throw Error("gp_fit: duplicate inputs with conflicting targets: (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
    }
  return GPModel(std::move(X), std::move(y), params);
}

double expected_improvement_value(double mean, double stddev, double best) {
  if (stddev <= 0.0) return std::max(best - mean, 0.0);
  double z = (best - mean) / stddev;
  double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max((best - mean) * cdf + stddev * pdf, 0.0);
}

double expected_improvement(const GPModel& m, std::span<const double> z, double best) {
  auto [mean, var] = m.posterior(z);
  return expected_improvement_value(mean, std::sqrt(var), best);
}

namespace {

struct Candidate {
  double ei = -1.0;
  double mean = 0.0;
  std::vector<double> z;       // normalized
  std::vector<double> config;  // denormalized
};

// better-than with declared tie-breaks: higher EI, then lower mean, then
// lexicographically smaller configuration.
bool better(const Candidate& a, const Candidate& b) {
  if (b.ei < 0.0) return true;
  if (a.ei > b.ei + kTieTolerance) return true;
  if (a.ei < b.ei - kTieTolerance) return false;
  if (a.mean < b.mean - kTieTolerance) return true;
  if (a.mean > b.mean + kTieTolerance) return false;
  return std::lexicographical_compare(a.config.begin(), a.config.end(),
                                      b.config.begin(), b.config.end());
}

}  // namespace

std::vector<double> propose_next(const GPModel& m, const EnvSpace& space, double best,
                                 std::size_t candidate_budget, std::uint64_t seed) {
  validate_space(space);
  const std::size_t p = space.size();
  std::vector<std::size_t> grid_dims, cont_dims;
  for (std::size_t i = 0; i < p; ++i) {
    if (space.dims[i].kind == EnvDim::Kind::Grid)
      grid_dims.push_back(i);
    else
      cont_dims.push_back(i);
  }

  std::size_t combos = 1;
  for (std::size_t i : grid_dims) combos *= space.dims[i].values.size();

  // Rough eval cost of one coordinate-search descent; used to split the
  // candidate budget into multistarts per grid combination.
  constexpr std::size_t kEvalsPerStart = 45;
  std::size_t starts = 1;
  if (!cont_dims.empty()) {
    starts = std::clamp<std::size_t>(
        candidate_budget / std::max<std::size_t>(1, combos * kEvalsPerStart), 1, 16);
  }

  std::mt19937_64 rng(split_seed(seed, 0xACDC));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto score = [&](const std::vector<double>& z) {
    auto [mean, var] = m.posterior(z);
    return std::pair<double, double>(
        expected_improvement_value(mean, std::sqrt(var), best), mean);
  };

  Candidate overall;
  std::vector<double> z(p, 0.0);
  for (std::size_t combo = 0; combo < combos; ++combo) {
    // Decode this combo into normalized grid coordinates.
    std::size_t rem = combo;
    for (std::size_t i : grid_dims) {
      std::size_t count = space.dims[i].values.size();
      std::size_t idx = rem % count;
      rem /= count;
      z[i] = count == 1 ? 0.5
                        : static_cast<double>(idx) / static_cast<double>(count - 1);
    }

    for (std::size_t s = 0; s < starts; ++s) {
      // First start from the box center, the rest from seeded uniforms.
      for (std::size_t i : cont_dims) z[i] = s == 0 ? 0.5 : unit(rng);

      // Coordinate descent on the continuous dims with a shrinking step.
      auto [ei, mean] = score(z);
      for (double step = 0.25; step > 1e-4; step *= 0.5) {
        // Tie-break acceptances can drift for a very long time on flat EI
        // regions; cap the sweeps so each descent is bounded.
        bool moved = true;
        for (int sweep = 0; moved && sweep < 64; ++sweep) {
          moved = false;
          for (std::size_t i : cont_dims) {
            for (double dir : {+1.0, -1.0}) {
              double trial = std::clamp(z[i] + dir * step, 0.0, 1.0);
              if (trial == z[i]) continue;
              double saved = z[i];
              z[i] = trial;
              auto [ei2, mean2] = score(z);
              if (ei2 > ei + kTieTolerance ||
                  (std::abs(ei2 - ei) <= kTieTolerance && mean2 < mean - kTieTolerance)) {
                ei = ei2;
                mean = mean2;
                moved = true;
              } else {
                z[i] = saved;
              }
            }
          }
        }
      }

      Candidate cand{ei, mean, z, denormalize(space, z)};
      if (better(cand, overall)) overall = std::move(cand);
    }
    if (cont_dims.empty()) {
      auto [ei, mean] = score(z);
      Candidate cand{ei, mean, z, denormalize(space, z)};
      if (better(cand, overall)) overall = std::move(cand);
    }
  }
  return overall.config;
}

namespace {

// Stratified (Latin hypercube style) initial design in normalized space,
// generated in one deterministic pass so interrupted runs can be resumed.
std::vector<std::vector<double>> initial_design(const EnvSpace& space,
                                                std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(split_seed(seed, 0x1D));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t p = space.size();

  std::vector<std::vector<std::size_t>> perms(p);
  for (std::size_t j = 0; j < p; ++j) {
    perms[j].resize(count);
    std::iota(perms[j].begin(), perms[j].end(), 0);
    std::shuffle(perms[j].begin(), perms[j].end(), rng);
  }

  std::vector<std::vector<double>> design;
  design.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> z(p);
    for (std::size_t j = 0; j < p; ++j)
      z[j] = (static_cast<double>(perms[j][k]) + unit(rng)) / static_cast<double>(count);
    design.push_back(denormalize(space, z));
  }
  return design;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(values.size() - 1);
}

bool near_duplicate(const std::vector<std::vector<double>>& zs,
                    const std::vector<double>& z) {
  for (const auto& existing : zs) {
    double dist = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double diff = existing[i] - z[i];
      dist += diff * diff;
    }
    if (dist < kDuplicateTolerance) return true;
  }
  return false;
}

}  // namespace

FalsificationResult minimize_robustness(const Objective& objective, const EnvSpace& space,
                                        const BoOptions& opts, const Observer& observer,
                                        const std::vector<HistoryEntry>& resume) {
  validate_space(space);
  if (opts.init_count < 1 || opts.budget < opts.init_count)
    throw Error("minimize_robustness: need budget >= init_count >= 1");

  auto design = initial_design(space, opts.init_count, opts.seed);

  std::vector<std::vector<double>> zs;   // normalized evaluated inputs
  std::vector<double> ys;                // recorded values (penalties included)
  FalsificationResult result;
  result.h_star = std::numeric_limits<double>::infinity();

  auto record = [&](std::size_t k, std::vector<double> config, double value,
                    bool penalized) {
    zs.push_back(normalize(space, config));
    ys.push_back(value);
    if (value < result.h_star) {
      result.h_star = value;
      result.d_star = config;
    }
    HistoryEntry entry{k + 1, std::move(config), value, result.h_star, penalized};
    result.history.push_back(entry);
    if (observer) observer(result.history.back());
  };

  // Replay a stored prefix (resume support): trust the recorded values.
  std::size_t start = std::min(resume.size(), opts.budget);
  for (std::size_t k = 0; k < start; ++k)
    record(k, resume[k].configuration, resume[k].value, resume[k].penalized);

  KernelParams params = opts.params;
  auto fit_signal_variance = [&] {
    if (!opts.auto_signal_variance) return;
    std::span<const double> init_y(ys.data(), std::min(ys.size(), opts.init_count));
    params.signal_variance = std::max(sample_variance(init_y), 1e-8);
  };

  for (std::size_t k = start; k < opts.budget; ++k) {
    std::vector<double> config;
    if (k < opts.init_count) {
      config = design[k];
    } else {
      fit_signal_variance();
      GPModel model(
          [&] {
            Eigen::MatrixXd X(static_cast<Eigen::Index>(zs.size()),
                              static_cast<Eigen::Index>(space.size()));
            for (std::size_t i = 0; i < zs.size(); ++i)
              for (std::size_t j = 0; j < space.size(); ++j)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = zs[i][j];
            return X;
          }(),
          [&] {
            Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
            for (std::size_t i = 0; i < ys.size(); ++i)
              y[static_cast<Eigen::Index>(i)] = ys[i];
            return y;
          }(),
          params);
      config = propose_next(model, space, result.h_star, opts.candidate_budget,
                            split_seed(opts.seed, k));
      // Re-proposing an evaluated point adds no information and breaks the
      // noiseless fit; fall back to a fresh uniform draw. Seeded per
      // iteration so resumed runs stay on the original sample path.
      if (near_duplicate(zs, normalize(space, config))) {
        std::mt19937_64 fallback_rng(split_seed(opts.seed, 0xFA110000ull + k));
        config = sample_uniform(space, fallback_rng);
      }
    }

    double value;
    bool penalized = false;
    try {
      value = objective(config);
      if (!std::isfinite(value)) throw Error("objective returned a non-finite value");
    } catch (const Error&) {
      double worst = ys.empty() ? 0.0 : *std::max_element(ys.begin(), ys.end());
      value = worst + 1.0;
      penalized = true;
    }
    record(k, std::move(config), value, penalized);
  }

  result.budget_used = result.history.size();
  return result;
}

void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history) {
  if (history.empty()) throw Error("write_history_csv: empty history");
  const std::size_t p = history[0].configuration.size();
  os << "iteration";
  for (std::size_t j = 1; j <= p; ++j) os << ",d" << j;
  os << ",value,incumbent,penalized\n";
  os.precision(17);
  for (const auto& e : history) {
    os << e.iteration;
    for (double v : e.configuration) os << "," << v;
    os << "," << e.value << "," << e.incumbent << "," << (e.penalized ? 1 : 0) << "\n";
  }
}

std::vector<HistoryEntry> read_history_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("history CSV: missing header");
  std::size_t cols = 1;
  for (char c : line)
    if (c == ',') ++cols;
  if (cols < 4) throw Error("history CSV: malformed header");
  const std::size_t p = cols - 4;

  std::vector<HistoryEntry> history;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != cols) throw Error("history CSV: ragged row");
    HistoryEntry e;
    e.iteration = static_cast<std::size_t>(vals[0]);
    e.configuration.assign(vals.begin() + 1, vals.begin() + 1 + p);
    e.value = vals[p + 1];
    e.incumbent = vals[p + 2];
    e.penalized = vals[p + 3] != 0.0;
    history.push_back(std::move(e));
  }
  return history;
}

}  // namespace specguard::bayesopt
