#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "component_tracker.hpp"
#include "random.hpp"
#include "rates.hpp"

namespace bfgraph {

/// A point of the cluster space: a doubleton born at `birth` that grows by
/// single attachments at the (strictly increasing) `jumps` instants.
struct ClusterSample {
  double birth = 0;
  std::vector<double> jumps;

  /// 0 before birth, then 2 plus the number of attachments so far.
  std::uint64_t size_at(double u) const {
    if (u < birth) return 0;
    return 2 + static_cast<std::uint64_t>(std::upper_bound(jumps.begin(), jumps.end(), u) - jumps.begin());
  }
};

struct KernelEstimate {
  double t = 0;
  std::size_t m = 0;
  double rho_hat = 0;
  double std_err = 0;
};

/// Everything needed to draw clusters from the normalized measure mu_t and
/// to evaluate the kernel kappa_t: quadrature tables of a over [0, t] and
/// of b over the rate horizon.
class ClusterSpace {
 public:
  static constexpr std::size_t kQuadratureCells = 10'000;

  ClusterSpace(RateFunctions rates, double t)
      : rates_(std::move(rates)), t_(t) {
    if (!(t >= 0) || t > rates_.horizon() * (1 + 1e-12))
      throw std::out_of_range("ClusterSpace: t outside the rate horizon");
    if (t > 0) immigration_ = CumulativeIntegral([this](double s) { return rates_.a(s); }, t, kQuadratureCells);
    edge_ = CumulativeIntegral([this](double s) { return rates_.b(s); }, rates_.horizon(), kQuadratureCells);
  }

  double t() const { return t_; }
  const RateFunctions& rates() const { return rates_; }

  /// mu_t of the whole space: integral of a over [0, t].
  double total_mass() const { return t_ > 0 ? immigration_.total() : 0.0; }

  /// Birth time with density a(s) / mass on [0, t]; attachments follow the
  /// pure-birth chain with rate r c(u) at size r, simulated by thinning
  /// against r and continued up to the rate horizon.
  ClusterSample sample(Engine& rng) const {
    if (!(total_mass() > 0)) throw std::domain_error("ClusterSpace: zero immigration mass on [0, t]");
    ClusterSample x;
    x.birth = std::min(t_, immigration_.inverse(uniform01(rng) * total_mass()));
    const double end = rates_.horizon();
    double u = x.birth;
    double size = 2;
    for (;;) {
      u += exponential(rng, size);
      if (u > end) break;
      if (uniform01(rng) < rates_.c(u)) {
        x.jumps.push_back(u);
        size += 1;
      }
    }
    return x;
  }

  /// kappa_t(x, y) = integral over [0, t] of w(u) w~(u) b(u).
  double kernel(const ClusterSample& x, const ClusterSample& y) const { return kernel(x, y, t_); }

  double kernel(const ClusterSample& x, const ClusterSample& y, double t) const {
    double cur = std::max(x.birth, y.birth);
    if (cur >= t) return 0.0;
    auto i = static_cast<std::size_t>(std::upper_bound(x.jumps.begin(), x.jumps.end(), cur) - x.jumps.begin());
    auto j = static_cast<std::size_t>(std::upper_bound(y.jumps.begin(), y.jumps.end(), cur) - y.jumps.begin());
    double wx = 2.0 + static_cast<double>(i);
    double wy = 2.0 + static_cast<double>(j);
    double b_cur = edge_(cur);
    double acc = 0.0;
    while (cur < t) {
      const double nx = i < x.jumps.size() ? x.jumps[i] : t;
      const double ny = j < y.jumps.size() ? y.jumps[j] : t;
      const double next = std::min({nx, ny, t});
      const double b_next = edge_(next);
      acc += wx * wy * (b_next - b_cur);
      b_cur = b_next;
      cur = next;
      if (nx <= next && i < x.jumps.size()) { ++i; wx += 1; }
      if (ny <= next && j < y.jumps.size()) { ++j; wy += 1; }
    }
    return acc;
  }

 private:
  RateFunctions rates_;
  double t_;
  CumulativeIntegral immigration_;
  CumulativeIntegral edge_;
};

inline ClusterSample sample_cluster(const RateFunctions& rates, double t, std::uint64_t seed) {
  Engine rng = make_engine(seed);
  return ClusterSpace(rates, t).sample(rng);
}

inline double kernel_eval(const ClusterSample& x, const ClusterSample& y, const RateFunctions& rates, double t) {
  return ClusterSpace(rates, t).kernel(x, y);
}

struct PowerIterationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Largest eigenvalue of a symmetric nonnegative row-major matrix.
inline double top_eigenvalue(const std::vector<double>& matrix, std::size_t m, double tol = 1e-8,
                             std::size_t max_iter = 20'000) {
  std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m))), w(m);
  double lambda = 0.0;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = matrix.data() + i * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += row[j] * v[j];
      w[i] = acc;
    }
    double norm = 0.0;
    for (double e : w) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / norm;
    if (std::abs(norm - lambda) <= tol * norm) return norm;
    lambda = norm;
  }
  throw PowerIterationError("top_eigenvalue: power iteration did not converge");
}

struct RhoOptions {
  std::size_t repetitions = 4;
  double tolerance = 1e-8;
  std::size_t max_iter = 20'000;
};

/// Operator norm of the kernel's integral operator on L2(mu_t), estimated as
/// the top eigenvalue of (mu_t(X)/m) [kappa_t(x_i, x_j)] for m i.i.d. draws
/// from the normalized measure. The reported value is the mean over
/// independent repetitions; std_err is their standard error.
inline KernelEstimate estimate_rho(const RateFunctions& rates, double t, std::size_t m, std::uint64_t seed,
                                   const RhoOptions& opt = {}) {
  if (m < 2) throw std::invalid_argument("estimate_rho: m must be >= 2");
  if (opt.repetitions < 1) throw std::invalid_argument("estimate_rho: repetitions must be >= 1");
  KernelEstimate est{t, m, 0.0, 0.0};
  const ClusterSpace space(rates, t);
  const double mass = space.total_mass();
  if (!(mass > 0)) return est;

  std::vector<double> values;
  std::vector<double> matrix(m * m);
  std::vector<ClusterSample> clusters(m);
  for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
    Engine rng = make_engine(replica_seed(seed, rep));
    for (auto& c : clusters) c = space.sample(rng);
    const double scale = mass / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        const double k = scale * space.kernel(clusters[i], clusters[j]);
        matrix[i * m + j] = k;
        matrix[j * m + i] = k;
      }
    }
    values.push_back(top_eigenvalue(matrix, m, opt.tolerance, opt.max_iter));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  est.rho_hat = mean;
  est.std_err = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1) /
                                              static_cast<double>(values.size()))
                                  : 0.0;
  return est;
}

struct IrgSample {
  /// Component volumes (sums of w(t) over member clusters), nonincreasing.
  std::vector<double> volumes;
  std::size_t cluster_count = 0;
  /// Volume of the component holding the earliest-born cluster (0 if none).
  double first_volume = 0;
  /// Volume of the component holding the marked cluster, when one was given.
  double marked_volume = 0;
};

namespace detail {

inline IrgSample sample_irg_impl(std::uint64_t n, const ClusterSpace& space, std::uint64_t seed,
                                 const ClusterSample* marked) {
  Engine rng = make_engine(seed);
  const double t = space.t();
  const double nd = static_cast<double>(n);
  std::vector<ClusterSample> clusters;
  const double mass = space.total_mass();
  const std::uint64_t count = mass > 0 ? poisson(rng, nd * mass) : 0;
  clusters.reserve(count + 1);
  for (std::uint64_t i = 0; i < count; ++i) clusters.push_back(space.sample(rng));
  if (marked) clusters.push_back(*marked);

  IrgSample out;
  out.cluster_count = clusters.size();
  if (clusters.empty()) return out;

  ComponentTracker tr(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t j = i + 1; j < clusters.size(); ++j) {
      const double k = space.kernel(clusters[i], clusters[j]);
      if (k <= 0) {
        uniform01(rng);
        continue;
      }
      if (uniform01(rng) < -std::expm1(-k / nd)) tr.merge(static_cast<Vertex>(i), static_cast<Vertex>(j));
    }
  }
  std::vector<double> by_root(clusters.size(), 0.0);
  for (std::size_t i = 0; i < clusters.size(); ++i)
    by_root[tr.find(static_cast<Vertex>(i))] += static_cast<double>(clusters[i].size_at(t));
  for (std::size_t i = 0; i < clusters.size(); ++i)
    if (by_root[i] > 0) out.volumes.push_back(by_root[i]);
  std::sort(out.volumes.begin(), out.volumes.end(), std::greater<>{});

  if (count > 0) {
    std::size_t first = 0;
    for (std::size_t i = 1; i < count; ++i)
      if (clusters[i].birth < clusters[first].birth) first = i;
    out.first_volume = by_root[tr.find(static_cast<Vertex>(first))];
  }
  if (marked) out.marked_volume = by_root[tr.find(static_cast<Vertex>(clusters.size() - 1))];
  return out;
}

}  // namespace detail

/// Inhomogeneous random graph on the cluster space: Poisson(n mu_t(X))
/// clusters, each pair joined with probability 1 - exp(-kappa_t / n).
inline IrgSample sample_irg(std::uint64_t n, const ClusterSpace& space, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_irg: n must be >= 1");
  return detail::sample_irg_impl(n, space, seed, nullptr);
}

inline IrgSample sample_irg(std::uint64_t n, const RateFunctions& rates, double t, std::uint64_t seed) {
  return sample_irg(n, ClusterSpace(rates, t), seed);
}

/// Same graph with the extra cluster x0 added to the Poisson points; the
/// marked volume is the volume of x0's component.
inline IrgSample sample_irg_with(std::uint64_t n, const ClusterSpace& space, const ClusterSample& x0,
                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_irg_with: n must be >= 1");
  return detail::sample_irg_impl(n, space, seed, &x0);
}

struct BranchingOptions {
  std::size_t generation_cap = 50;
  double volume_cap = 1e6;
  /// Fresh cluster draws used per individual to estimate its offspring
  /// intensity and to resample offspring types.
  std::size_t proposals = 256;
};

struct BranchingVolume {
  double volume = 0;
  bool truncated = false;
  std::size_t individuals = 0;
};

/// Total phi_t volume of the branching process started from x0 whose
/// individuals of type x have offspring given by a Poisson process with
/// intensity kappa_t(x, y) mu_t(dy). The offspring intensity of each
/// individual is estimated by importance sampling from mu_t and the child
/// types are resampled from the same proposals with weights kappa_t(x, y).
inline BranchingVolume sample_bp_volume(const ClusterSample& x0, const ClusterSpace& space, std::uint64_t seed,
                                        const BranchingOptions& opt = {}) {
  if (opt.generation_cap < 1 || !(opt.volume_cap > 0) || opt.proposals < 1)
    throw std::invalid_argument("sample_bp_volume: caps must be positive");
  Engine rng = make_engine(seed);
  const double t = space.t();
  const double mass = space.total_mass();
  BranchingVolume out;
  out.volume = static_cast<double>(x0.size_at(t));
  out.individuals = 1;
  if (!(mass > 0)) return out;

  std::vector<ClusterSample> generation{x0}, next;
  std::vector<ClusterSample> proposals(opt.proposals);
  std::vector<double> weights(opt.proposals);
  for (std::size_t g = 0; !generation.empty(); ++g) {
    if (g >= opt.generation_cap) {
      out.truncated = true;
      break;
    }
    next.clear();
    for (const auto& parent : generation) {
      double sum = 0.0;
      for (std::size_t j = 0; j < opt.proposals; ++j) {
        proposals[j] = space.sample(rng);
        weights[j] = space.kernel(parent, proposals[j]);
        sum += weights[j];
      }
      if (sum <= 0) continue;
      const double intensity = mass * sum / static_cast<double>(opt.proposals);
      const std::uint64_t children = poisson(rng, intensity);
      if (children == 0) continue;
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      for (std::uint64_t c = 0; c < children; ++c) {
        const auto& child = proposals[pick(rng)];
        out.volume += static_cast<double>(child.size_at(t));
        ++out.individuals;
        next.push_back(child);
      }
      if (out.volume > opt.volume_cap) {
        out.truncated = true;
        return out;
      }
    }
    std::swap(generation, next);
  }
  return out;
}

}  // namespace bfgraph
