#include "specguard/space.hpp"

#include <algorithm>
#include <cmath>

namespace specguard {

void validate_space(const EnvSpace& space) {
  if (space.dims.empty()) throw Error("EnvSpace: no dimensions");
  for (const auto& dim : space.dims) {
    if (dim.kind == EnvDim::Kind::Continuous) {
      if (!(dim.lo < dim.hi)) throw Error("EnvSpace: continuous dim needs lo < hi");
    } else {
      if (dim.values.empty()) throw Error("EnvSpace: grid dim has no values");
      if (!std::is_sorted(dim.values.begin(), dim.values.end()))
        throw Error("EnvSpace: grid values must be ascending");
    }
  }
}

namespace {

// Index of d in a grid dim, or -1 when d is not a grid value.
long grid_index(const EnvDim& dim, double v) {
  for (std::size_t i = 0; i < dim.values.size(); ++i)
    if (std::abs(dim.values[i] - v) < 1e-9) return static_cast<long>(i);
  return -1;
}

}  // namespace

bool contains(const EnvSpace& space, std::span<const double> d) {
  if (d.size() != space.size()) return false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& dim = space.dims[i];
    if (dim.kind == EnvDim::Kind::Continuous) {
      if (d[i] < dim.lo || d[i] > dim.hi) return false;
    } else if (grid_index(dim, d[i]) < 0) {
      return false;
    }
  }
  return true;
}

std::vector<double> sample_uniform(const EnvSpace& space, std::mt19937_64& rng) {
  std::vector<double> d(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& dim = space.dims[i];
    if (dim.kind == EnvDim::Kind::Continuous) {
      d[i] = std::uniform_real_distribution<double>(dim.lo, dim.hi)(rng);
    } else {
      auto idx = std::uniform_int_distribution<std::size_t>(0, dim.values.size() - 1)(rng);
      d[i] = dim.values[idx];
    }
  }
  return d;
}

std::vector<double> normalize(const EnvSpace& space, std::span<const double> d) {
  if (d.size() != space.size()) throw Error("normalize: dimension mismatch");
  std::vector<double> z(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& dim = space.dims[i];
    if (dim.kind == EnvDim::Kind::Continuous) {
      z[i] = (d[i] - dim.lo) / (dim.hi - dim.lo);
    } else {
      long idx = grid_index(dim, d[i]);
      if (idx < 0) throw Error("normalize: value is not on the grid");
      z[i] = dim.values.size() == 1
                 ? 0.5
                 : static_cast<double>(idx) / static_cast<double>(dim.values.size() - 1);
    }
  }
  return z;
}

std::vector<double> denormalize(const EnvSpace& space, std::span<const double> z) {
  if (z.size() != space.size()) throw Error("denormalize: dimension mismatch");
  std::vector<double> d(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& dim = space.dims[i];
    if (dim.kind == EnvDim::Kind::Continuous) {
      d[i] = dim.lo + z[i] * (dim.hi - dim.lo);
    } else {
      auto steps = static_cast<double>(dim.values.size() - 1);
      auto idx = static_cast<std::size_t>(std::clamp(
          std::llround(z[i] * steps), 0LL, static_cast<long long>(steps)));
      d[i] = dim.values[idx];
    }
  }
  return d;
}

}  // namespace specguard
