#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "random.hpp"

namespace bfgraph {

/// Finite element of l2-down: strictly positive masses in nonincreasing order.
class MassVector {
 public:
  MassVector() = default;

  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }
  bool empty() const { return masses_.empty(); }
  double operator[](std::size_t i) const { return masses_[i]; }
  double largest() const { return masses_.empty() ? 0.0 : masses_.front(); }

  double total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }
  double sum_of_squares() const {
    double acc = 0.0;
    for (double m : masses_) acc += m * m;
    return acc;
  }

  friend MassVector order_mass(std::span<const double> raw);

 private:
  std::vector<double> masses_;
};

/// Drops zeros and sorts nonincreasing. Negative entries are rejected.
inline MassVector order_mass(std::span<const double> raw) {
  MassVector out;
  for (double v : raw) {
    if (v < 0 || v != v) throw std::invalid_argument("order_mass: entries must be nonnegative");
    if (v > 0) out.masses_.push_back(v);
  }
  std::sort(out.masses_.begin(), out.masses_.end(), std::greater<>{});
  return out;
}

inline MassVector order_mass(const std::vector<double>& raw) { return order_mass(std::span<const double>(raw)); }

/// Walker alias table for O(1) draws proportional to nonnegative weights.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t k = weights.size();
    if (k == 0) throw std::invalid_argument("AliasTable: no weights");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0)) throw std::invalid_argument("AliasTable: weights sum to zero");
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      scaled[i] = weights[i] * static_cast<double>(k) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
    for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t draw(Engine& rng) const {
    const std::size_t i = uniform_below(rng, prob_.size());
    return uniform01(rng) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

struct CoalescentRun {
  MassVector masses;
  std::vector<double> merge_times;
};

/// Gillespie simulation of the multiplicative coalescent: clusters i and j
/// merge at rate x_i x_j, so the total rate is ((sum x)^2 - sum x^2) / 2.
/// The merging pair is two independent size-biased draws, both redrawn
/// until distinct, which makes P(i, j) proportional to x_i x_j.
inline CoalescentRun run_coalescent(const MassVector& x0, double duration, std::uint64_t seed) {
  if (x0.empty()) throw std::invalid_argument("simulate_coalescent: empty initial state");
  if (!(duration >= 0)) throw std::invalid_argument("simulate_coalescent: duration must be >= 0");
  Engine rng = make_engine(seed);
  std::vector<double> x = x0.masses();
  CoalescentRun run;
  double t = 0;
  while (x.size() >= 2) {
    double sum = 0, squares = 0;
    for (double m : x) sum += m, squares += m * m;
    const double rate = 0.5 * (sum * sum - squares);
    if (!(rate > 0)) break;
    t += exponential(rng, rate);
    if (t > duration) break;
    const AliasTable table(x);
    std::size_t i = 0, j = 0;
    do {
      i = table.draw(rng);
      j = table.draw(rng);
    } while (i == j);
    x[i] += x[j];
    x[j] = x.back();
    x.pop_back();
    run.merge_times.push_back(t);
  }
  run.masses = order_mass(x);
  return run;
}

inline MassVector simulate_coalescent(const MassVector& x0, double duration, std::uint64_t seed) {
  return run_coalescent(x0, duration, seed).masses;
}

}  // namespace bfgraph
