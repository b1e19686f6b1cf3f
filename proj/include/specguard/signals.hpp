#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "specguard/common.hpp"

namespace specguard {

/// A sampled signal: time-stamped state vectors over [0, t_f].
/// Immutable after construction; invariants are checked once in the ctor.
class Trajectory {
public:
  /// `data` is row-major: sample i occupies data[i*dim .. i*dim+dim).
  Trajectory(std::vector<double> times, std::vector<double> data, std::size_t dim);

  std::size_t size() const { return times_.size(); }
  std::size_t dim() const { return dim_; }
  double time(std::size_t i) const { return times_[i]; }
  double final_time() const { return times_.back(); }
  std::span<const double> state(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Trajectory& other) const = default;

private:
  std::vector<double> times_;
  std::vector<double> data_;
  std::size_t dim_;
};

/// Per-coordinate non-negative scaling weights for the weighted Euclidean
/// norm ||x|| = sqrt(sum_i w_i x_i^2).
struct WeightedNorm {
  std::vector<double> weights;

  std::size_t dim() const { return weights.size(); }
  bool operator==(const WeightedNorm& other) const = default;
};

/// Throws on negative weights or all-zero weights.
void validate_norm(const WeightedNorm& nrm);

double weighted_norm(std::span<const double> x, const WeightedNorm& nrm);

/// max over shared timestamps of weighted_norm(a(t) - b(t)). The grids must
/// match exactly; no resampling is performed.
double sup_deviation(const Trajectory& a, const Trajectory& b, const WeightedNorm& nrm);

/// CSV with header `t,x1,...,xn`, one row per sample.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace specguard
