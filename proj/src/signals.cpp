#include "specguard/signals.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace specguard {

Trajectory::Trajectory(std::vector<double> times, std::vector<double> data, std::size_t dim)
    : times_(std::move(times)), data_(std::move(data)), dim_(dim) {
  if (dim_ == 0) throw Error("Trajectory: state dimension must be positive");
  if (times_.size() < 2) throw Error("Trajectory: need at least 2 samples");
  if (data_.size() != times_.size() * dim_)
    throw Error("Trajectory: state count does not match timestamp count");
  if (times_.front() != 0.0) throw Error("Trajectory: times must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw Error("Trajectory: times must be strictly increasing");
}

void validate_norm(const WeightedNorm& nrm) {
  if (nrm.weights.empty()) throw Error("WeightedNorm: empty weight vector");
  bool any_positive = false;
  for (double w : nrm.weights) {
    if (w < 0.0) throw Error("WeightedNorm: negative weight");
    if (w > 0.0) any_positive = true;
  }
  if (!any_positive) throw Error("WeightedNorm: all weights are zero");
}

double weighted_norm(std::span<const double> x, const WeightedNorm& nrm) {
  if (x.size() != nrm.weights.size())
    throw Error("weighted_norm: dimension mismatch (" + std::to_string(x.size()) +
                " vs " + std::to_string(nrm.weights.size()) + ")");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += nrm.weights[i] * x[i] * x[i];
  return std::sqrt(acc);
}

double sup_deviation(const Trajectory& a, const Trajectory& b, const WeightedNorm& nrm) {
  if (a.dim() != b.dim()) throw Error("sup_deviation: state dimension mismatch");
  if (a.times() != b.times())
    throw Error("sup_deviation: timestamp grids differ; resampling is not implicit");
  std::vector<double> diff(a.dim());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto xa = a.state(i);
    auto xb = b.state(i);
    for (std::size_t j = 0; j < a.dim(); ++j) diff[j] = xa[j] - xb[j];
    worst = std::max(worst, weighted_norm(diff, nrm));
  }
  return worst;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "t";
  for (std::size_t j = 1; j <= t.dim(); ++j) os << ",x" << j;
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t.time(i);
    for (double v : t.state(i)) os << "," << v;
    os << "\n";
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("trajectory CSV: missing header");
  std::size_t dim = 0;
  for (char c : line)
    if (c == ',') ++dim;
  if (dim == 0) throw Error("trajectory CSV: header has no state columns");

  std::vector<double> times;
  std::vector<double> data;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      double v = std::stod(cell);
      if (col == 0)
        times.push_back(v);
      else
        data.push_back(v);
      ++col;
    }
    if (col != dim + 1) throw Error("trajectory CSV: ragged row");
  }
  return Trajectory(std::move(times), std::move(data), dim);
}

}  // namespace specguard
