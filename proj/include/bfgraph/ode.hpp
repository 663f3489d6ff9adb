#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfgraph {

struct OdeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OdeTolerances {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double min_step = 1e-15;
  double initial_step = 1e-4;
  std::size_t max_steps = 1'000'000;
};

/// Embedded Dormand-Prince 5(4) pair with PI-free standard step control.
template <std::size_t N>
class DormandPrince {
 public:
  using State = std::array<double, N>;

  explicit DormandPrince(OdeTolerances tol = {}) : tol_(tol) {
    if (!(tol.abs_tol > 0) || !(tol.rel_tol >= 0) || !(tol.min_step > 0))
      throw std::invalid_argument("DormandPrince: tolerances must be positive");
  }

  /// Integrates from (t0, y0) to t1 > t0. `on_step(t, y)` is called after
  /// every accepted step; returning false stops the integration early.
  /// Returns the state at the last accepted time, written to `t_out`.
  template <class F, class Observer>
  State integrate(F&& f, double t0, State y, double t1, Observer&& on_step, double* t_out = nullptr) const {
    double t = t0;
    double h = std::min(tol_.initial_step, t1 - t0);
    State k1 = f(t, y);
    std::size_t steps = 0;
    while (t < t1) {
      if (++steps > tol_.max_steps) throw OdeError("DormandPrince: step budget exhausted");
      if (t + h > t1) h = t1 - t;
      State y_new, err;
      State k7 = attempt(f, t, y, h, k1, y_new, err);
      double norm = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double scale = tol_.abs_tol + tol_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        norm = std::max(norm, std::abs(err[i]) / scale);
      }
      if (!std::isfinite(norm)) norm = 1e10;
      if (norm <= 1.0) {
        t = (h == t1 - t) ? t1 : t + h;
        y = y_new;
        k1 = k7;
        if (!on_step(t, y)) break;
      }
      const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      h *= factor;
      if (h < tol_.min_step && t < t1) {
        if (t1 - t < tol_.min_step) {
          h = t1 - t;
        } else {
          throw OdeError("DormandPrince: step size underflow at t=" + std::to_string(t));
        }
      }
    }
    if (t_out) *t_out = t;
    return y;
  }

  template <class F>
  State integrate(F&& f, double t0, const State& y0, double t1) const {
    return integrate(std::forward<F>(f), t0, y0, t1, [](double, const State&) { return true; });
  }

 private:
  template <class F>
  static State attempt(F& f, double t, const State& y, double h, const State& k1, State& y_new, State& err) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    State tmp;
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * combine(i);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; });
    const State k2 = f(t + c2 * h, tmp);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; });
    const State k3 = f(t + c3 * h, tmp);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; });
    const State k4 = f(t + c4 * h, tmp);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; });
    const State k5 = f(t + c5 * h, tmp);
    stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; });
    const State k6 = f(t + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const State k7 = f(t + h, y_new);
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    return k7;
  }

  OdeTolerances tol_;
};

// ---------------------------------------------------------------------------
// Limiting equations of the Bohman-Frieze process.

/// Singleton density x, inverse susceptibility y = 1/s2 and z = s3/s2^3.
/// All three stay bounded through the critical time, where y crosses 0.
struct BfFlow {
  using State = std::array<double, 3>;
  State operator()(double, const State& u) const {
    const double x = u[0], y = u[1], z = u[2];
    const double x2 = x * x;
    return {-x2 - (1 - x2) * x, -x2 * y * y - (1 - x2), 3 * x2 * y * y * y - 3 * x2 * y * z};
  }
};

/// The same system written for (x, s2, s3); only meaningful before t_c.
struct BfMomentFlow {
  using State = std::array<double, 3>;
  State operator()(double, const State& u) const {
    const double x = u[0], s2 = u[1], s3 = u[2];
    const double x2 = x * x;
    return {-x2 - (1 - x2) * x, x2 + (1 - x2) * s2 * s2, 3 * x2 + 3 * (1 - x2) * s2 * s3};
  }
};

/// Erdos-Renyi analogue: s2' = s2^2, i.e. y' = -1.
struct ErFlow {
  using State = std::array<double, 1>;
  State operator()(double, const State&) const { return {-1.0}; }
};

struct OdeSolution {
  std::vector<double> t, x, s2, s3, y, z;
  double t_c = 0;
  double alpha = 0;
  double beta = 0;
  /// State (x, y, z) evaluated at t_c itself.
  double x_at_tc = 0;
  double z_at_tc = 0;
};

/// Finds the first time component `index` of the flow started from
/// (0, initial) becomes nonpositive. The bracket is located by adaptive
/// integration and refined by bisection until the endpoints are adjacent
/// doubles. Writes the state at the root to `at_root` when given.
template <class Flow>
double first_zero(const Flow& flow, typename Flow::State initial, std::size_t index, double t_max,
                  const OdeTolerances& tol, typename Flow::State* at_root = nullptr) {
  using State = typename Flow::State;
  constexpr std::size_t N = std::tuple_size_v<State>;
  DormandPrince<N> solver{tol};
  double lo_t = 0.0;
  State lo = initial;
  double hi_t = std::numeric_limits<double>::quiet_NaN();
  State hi{};
  double t_stop = 0;
  solver.integrate(
      flow, 0.0, initial, t_max,
      [&](double t, const State& u) {
        if (u[index] > 0) {
          lo_t = t;
          lo = u;
          return true;
        }
        hi_t = t;
        hi = u;
        return false;
      },
      &t_stop);
  if (std::isnan(hi_t)) throw OdeError("first_zero: no sign change before t_max");

  DormandPrince<N> fine{tol};
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo_t + hi_t);
    if (mid <= lo_t || mid >= hi_t) break;
    const State at_mid = fine.integrate(flow, lo_t, lo, mid);
    if (at_mid[index] > 0) {
      lo_t = mid;
      lo = at_mid;
    } else {
      hi_t = mid;
      hi = at_mid;
    }
  }
  // Pick whichever endpoint is closer to the root in linear interpolation.
  const double root = (lo[index] - hi[index]) != 0
                          ? lo_t + (hi_t - lo_t) * lo[index] / (lo[index] - hi[index])
                          : lo_t;
  if (at_root) *at_root = std::abs(root - lo_t) <= std::abs(hi_t - root) ? lo : hi;
  return root;
}

/// Critical time of the Bohman-Frieze process: the zero of y = 1/s2.
inline double find_tc(const OdeTolerances& tol = {}) {
  return first_zero(BfFlow{}, {1.0, 1.0, 1.0}, 1, 2.0, tol);
}

/// Critical time of the Erdos-Renyi analogue (y = 1 - t).
inline double find_tc_er(const OdeTolerances& tol = {}) {
  return first_zero(ErFlow{}, {1.0}, 0, 2.0, tol);
}

struct AlphaBeta {
  double alpha;
  double beta;
};

/// alpha = 1 / (1 - x(t_c)^2); beta = lim z(t) as t -> t_c. Because z is
/// integrated directly and stays smooth through t_c, the limit is its value
/// at the root.
inline AlphaBeta compute_alpha_beta(const OdeSolution& sol) {
  const double b = 1.0 - sol.x_at_tc * sol.x_at_tc;
  if (!(b > 0) || !std::isfinite(sol.z_at_tc)) throw OdeError("compute_alpha_beta: solution does not reach t_c");
  return {1.0 / b, sol.z_at_tc};
}

/// Integrates (x, y, z) from 0 to t_c, keeping every accepted step strictly
/// before t_c on the grid, and fills in t_c, alpha and beta.
inline OdeSolution solve_system(const OdeTolerances& tol = {}) {
  OdeSolution sol;
  BfFlow::State at_root{};
  sol.t_c = first_zero(BfFlow{}, {1.0, 1.0, 1.0}, 1, 2.0, tol, &at_root);
  sol.x_at_tc = at_root[0];
  sol.z_at_tc = at_root[2];

  DormandPrince<3> solver{tol};
  auto record = [&](double t, const BfFlow::State& u) {
    if (!(t < sol.t_c) || !(u[1] > 0)) return false;
    sol.t.push_back(t);
    sol.x.push_back(u[0]);
    sol.y.push_back(u[1]);
    sol.z.push_back(u[2]);
    sol.s2.push_back(1.0 / u[1]);
    sol.s3.push_back(u[2] / (u[1] * u[1] * u[1]));
    return true;
  };
  record(0.0, {1.0, 1.0, 1.0});
  solver.integrate(BfFlow{}, 0.0, BfFlow::State{1.0, 1.0, 1.0}, sol.t_c, record);

  const auto ab = compute_alpha_beta(sol);
  sol.alpha = ab.alpha;
  sol.beta = ab.beta;
  return sol;
}

/// (x, y, z) at a single time t (which may exceed t_c; y is then negative).
inline BfFlow::State bf_state_at(double t, const OdeTolerances& tol = {}) {
  if (t < 0) throw std::invalid_argument("bf_state_at: t must be >= 0");
  if (t == 0) return {1.0, 1.0, 1.0};
  return DormandPrince<3>{tol}.integrate(BfFlow{}, 0.0, BfFlow::State{1.0, 1.0, 1.0}, t);
}

/// (x, s2, s3) at t < t_c from the untransformed moment equations.
inline BfMomentFlow::State bf_moments_at(double t, const OdeTolerances& tol = {}) {
  if (t == 0) return {1.0, 1.0, 1.0};
  return DormandPrince<3>{tol}.integrate(BfMomentFlow{}, 0.0, BfMomentFlow::State{1.0, 1.0, 1.0}, t);
}

struct CriticalConstants {
  double t_c;
  double alpha;
  double beta;
  /// Horizon used by every time-bounded model: twice the critical time.
  double horizon() const { return 2.0 * t_c; }
};

/// Constants from the default-tolerance integration, computed once per process.
inline const CriticalConstants& critical_constants() {
  static const CriticalConstants constants = [] {
    const OdeSolution sol = solve_system();
    return CriticalConstants{sol.t_c, sol.alpha, sol.beta};
  }();
  return constants;
}

// ---------------------------------------------------------------------------
// Singleton density on the whole horizon and the induced rate functions.

/// x(t) tabulated on a uniform grid over [0, t_max] with cubic Hermite
/// interpolation (slopes taken from the vector field itself).
class SingletonDensity {
 public:
  explicit SingletonDensity(double t_max, std::size_t cells = 4096, const OdeTolerances& tol = {})
      : t_max_(t_max), h_(t_max / static_cast<double>(cells)) {
    if (!(t_max > 0) || cells == 0) throw std::invalid_argument("SingletonDensity: bad grid");
    values_.resize(cells + 1);
    values_[0] = 1.0;
    using Flow1 = std::array<double, 1>;
    auto flow = [](double, const Flow1& u) { return Flow1{slope(u[0])}; };
    DormandPrince<1> solver{tol};
    Flow1 state{1.0};
    for (std::size_t i = 1; i <= cells; ++i) {
      state = solver.integrate(flow, h_ * static_cast<double>(i - 1), state, h_ * static_cast<double>(i));
      values_[i] = state[0];
    }
  }

  static double slope(double x) { return -x * x - (1 - x * x) * x; }

  double operator()(double t) const {
    if (t < 0 || t > t_max_ * (1 + 1e-12))
      throw std::out_of_range("SingletonDensity: t=" + std::to_string(t) + " outside [0, " + std::to_string(t_max_) + "]");
    const double pos = std::min(t / h_, static_cast<double>(values_.size() - 1));
    auto i = static_cast<std::size_t>(pos);
    if (i >= values_.size() - 1) return values_.back();
    const double s = pos - static_cast<double>(i);
    const double p0 = values_[i], p1 = values_[i + 1];
    const double m0 = slope(p0) * h_, m1 = slope(p1) * h_;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
  }

  double t_max() const { return t_max_; }

 private:
  double t_max_;
  double h_;
  std::vector<double> values_;
};

struct BfRates {
  double a;
  double b;
  double c;
};

/// Limiting event rates of the Bohman-Frieze process at singleton density x:
/// doubleton creation (per n), edge between two given non-singletons (times n)
/// and attachment of a singleton to a given non-singleton vertex.
inline BfRates bf_rates_at_density(double x) {
  const double x2 = x * x;
  return {0.5 * (x2 + (1 - x2) * x2), 1 - x2, (1 - x2) * x};
}

inline BfRates rate_functions_at(const SingletonDensity& density, double t) {
  return bf_rates_at_density(density(t));
}

}  // namespace bfgraph
