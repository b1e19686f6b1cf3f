#pragma once

#include <random>
#include <span>
#include <vector>

#include "specguard/common.hpp"

namespace specguard {

/// Mixed continuous/integer-grid search space for environment configurations.
struct EnvDim {
  enum class Kind { Continuous, Grid };
  Kind kind = Kind::Continuous;
  double lo = 0.0, hi = 1.0;       // Continuous
  std::vector<double> values;      // Grid, ascending
};

struct EnvSpace {
  std::vector<EnvDim> dims;

  std::size_t size() const { return dims.size(); }
};

void validate_space(const EnvSpace& space);

bool contains(const EnvSpace& space, std::span<const double> d);

/// Uniform draw: continuous dims uniform on [lo, hi], grid dims uniform over
/// their values.
std::vector<double> sample_uniform(const EnvSpace& space, std::mt19937_64& rng);

/// Maps a configuration into the unit box: continuous dims affinely, grid
/// dims by value index scaled to [0, 1] (index-based, no relaxation).
std::vector<double> normalize(const EnvSpace& space, std::span<const double> d);
std::vector<double> denormalize(const EnvSpace& space, std::span<const double> z);

}  // namespace specguard
