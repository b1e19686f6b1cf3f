#pragma once

#include <random>
#include <vector>

#include "specguard/signals.hpp"
#include "specguard/stl.hpp"

namespace specguard::testing {

/// Random piecewise-linear trajectory: a handful of knots, linearly
/// interpolated onto a uniform grid.
inline Trajectory random_piecewise_linear(std::mt19937_64& rng, std::size_t dim,
                                          std::size_t samples = 50,
                                          double amplitude = 2.0) {
  std::uniform_int_distribution<std::size_t> knot_count(2, 6);
  std::uniform_real_distribution<double> value(-amplitude, amplitude);

  std::size_t knots = knot_count(rng);
  std::vector<std::vector<double>> knot_vals(knots, std::vector<double>(dim));
  for (auto& kv : knot_vals)
    for (double& v : kv) v = value(rng);

  std::vector<double> times(samples);
  std::vector<double> data(samples * dim);
  for (std::size_t i = 0; i < samples; ++i) {
    double u = static_cast<double>(i) / static_cast<double>(samples - 1);
    times[i] = u;
    double pos = u * static_cast<double>(knots - 1);
    auto lo = std::min(static_cast<std::size_t>(pos), knots - 2);
    double frac = pos - static_cast<double>(lo);
    for (std::size_t j = 0; j < dim; ++j)
      data[i * dim + j] =
          (1.0 - frac) * knot_vals[lo][j] + frac * knot_vals[lo + 1][j];
  }
  return Trajectory(std::move(times), std::move(data), dim);
}

/// Random reach-avoid spec over `dim` coordinates: always/eventually around
/// a random comparison or abs-comparison predicate.
inline stl::Spec random_reach_avoid_spec(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> coord(0, dim - 1);
  std::uniform_real_distribution<double> bound(-1.5, 1.5);
  std::uniform_real_distribution<double> abs_bound(0.1, 1.5);

  stl::Predicate pred =
      coin(rng) ? stl::Predicate::compare(coord(rng),
                                          coin(rng) ? stl::Cmp::Le : stl::Cmp::Ge,
                                          bound(rng))
                : stl::Predicate::abs_compare(coord(rng),
                                              coin(rng) ? stl::Cmp::Le : stl::Cmp::Ge,
                                              abs_bound(rng));
  auto node = coin(rng) ? stl::Node::make_always(stl::Node::make_pred(pred))
                        : stl::Node::make_eventually(stl::Node::make_pred(pred));
  return stl::Spec{node, stl::to_string(node)};
}

inline WeightedNorm random_positive_norm(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  WeightedNorm nrm;
  nrm.weights.resize(dim);
  for (double& w : nrm.weights) w = weight(rng);
  return nrm;
}

}  // namespace specguard::testing
