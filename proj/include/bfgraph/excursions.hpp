#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "random.hpp"

namespace bfgraph {

/// Ordered excursion lengths of the reflected path W(t) + lambda t - t^2/2.
struct ExcursionSet {
  double lambda = 0;
  std::vector<double> lengths;  ///< nonincreasing
  double horizon = 0;
  double step = 0;
  /// Time the reflected path spends strictly above zero, on the grid.
  double occupation = 0;

  double largest() const { return lengths.empty() ? 0.0 : lengths.front(); }
};

/// Streams grid values of a path and cuts it into excursions of its
/// reflection X(t) - min_{s<=t} X(s). An excursion spanning k positive grid
/// points between two zeros has length (k + 1) * step; a run still open at
/// the end of the path is closed there.
class ExcursionScanner {
 public:
  explicit ExcursionScanner(double step) : step_(step) {}

  void push(double value) {
    if (first_) {
      running_min_ = value;
      first_ = false;
      return;
    }
    running_min_ = std::min(running_min_, value);
    if (value - running_min_ > 0) {
      ++run_;
      ++positive_;
    } else if (run_ > 0) {
      lengths_.push_back(static_cast<double>(run_ + 1) * step_);
      run_ = 0;
    }
  }

  std::vector<double> finish() {
    if (run_ > 0) lengths_.push_back(static_cast<double>(run_) * step_);
    run_ = 0;
    std::sort(lengths_.begin(), lengths_.end(), std::greater<>{});
    return std::move(lengths_);
  }

  double occupation() const { return static_cast<double>(positive_) * step_; }

 private:
  double step_;
  bool first_ = true;
  double running_min_ = 0;
  std::uint64_t run_ = 0;
  std::uint64_t positive_ = 0;
  std::vector<double> lengths_;
};

/// Excursions of the reflection of an arbitrary grid path (values at 0, step, 2 step, ...).
inline std::vector<double> reflected_excursions(std::span<const double> path, double step) {
  if (!(step > 0)) throw std::invalid_argument("reflected_excursions: step must be positive");
  ExcursionScanner scan(step);
  for (double v : path) scan.push(v);
  return scan.finish();
}

/// Past roughly t = 2 lambda the parabolic drift dominates.
inline double default_excursion_horizon(double lambda) { return std::max(10.0, 2 * lambda + 10); }

/// Euler discretization of the Brownian path on a grid of mesh `step`; the
/// drift lambda t - t^2/2 is added exactly at the grid points.
inline ExcursionSet sample_excursions(double lambda, double horizon, double step, std::uint64_t seed) {
  if (!(step > 0)) throw std::invalid_argument("sample_excursions: step must be positive");
  if (!(horizon >= 10)) throw std::invalid_argument("sample_excursions: horizon must be >= 10");
  Engine rng = make_engine(seed);
  const auto points = static_cast<std::uint64_t>(std::llround(horizon / step));
  const double sd = std::sqrt(step);
  ExcursionScanner scan(step);
  double w = 0;
  scan.push(0.0);
  for (std::uint64_t k = 1; k <= points; ++k) {
    w += sd * standard_normal(rng);
    const double t = static_cast<double>(k) * step;
    scan.push(w + t * (lambda - 0.5 * t));
  }
  ExcursionSet out;
  out.lambda = lambda;
  out.horizon = horizon;
  out.step = step;
  out.occupation = scan.occupation();
  out.lengths = scan.finish();
  return out;
}

inline ExcursionSet sample_excursions(double lambda, double step, std::uint64_t seed) {
  return sample_excursions(lambda, default_excursion_horizon(lambda), step, seed);
}

}  // namespace bfgraph
