#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ode.hpp"

namespace bfgraph {

/// Three rate maps [0, horizon] -> [0, 1]: doubleton immigration a,
/// edge formation b and attachment c.
class RateFunctions {
 public:
  using Fn = std::function<double(double)>;

  RateFunctions(Fn a, Fn b, Fn c, double horizon)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), horizon_(horizon) {
    if (!(horizon > 0)) throw std::invalid_argument("RateFunctions: horizon must be positive");
  }

  double a(double t) const { return eval(a_, t, "a"); }
  double b(double t) const { return eval(b_, t, "b"); }
  double c(double t) const { return eval(c_, t, "c"); }
  double horizon() const { return horizon_; }

  static RateFunctions constant(double a, double b, double c, double horizon) {
    return {[a](double) { return a; }, [b](double) { return b; }, [c](double) { return c; }, horizon};
  }

  /// (a0, b0, c0) evaluated along the limiting singleton density x(t).
  static RateFunctions bohman_frieze(double horizon = critical_constants().horizon()) {
    auto density = std::make_shared<const SingletonDensity>(horizon);
    return {[density](double t) { return bf_rates_at_density((*density)(t)).a; },
            [density](double t) { return bf_rates_at_density((*density)(t)).b; },
            [density](double t) { return bf_rates_at_density((*density)(t)).c; }, horizon};
  }

  /// Every rate moved by `delta` and clipped to [0, 1]: (f - delta)^+ for
  /// negative delta, (f + delta) ^ 1 for positive delta.
  RateFunctions shifted(double delta) const {
    auto clip = [delta](Fn f) {
      return Fn{[f = std::move(f), delta](double t) { return std::clamp(f(t) + delta, 0.0, 1.0); }};
    };
    return {clip(a_), clip(b_), clip(c_), horizon_};
  }

 private:
  double eval(const Fn& f, double t, const char* name) const {
    if (!(t >= 0) || t > horizon_ * (1 + 1e-12))
      throw std::out_of_range(std::string("RateFunctions: ") + name + " evaluated at t=" + std::to_string(t) +
                              " outside [0, " + std::to_string(horizon_) + "]");
    return f(t);
  }

  Fn a_, b_, c_;
  double horizon_;
};

/// Running integral of a tabulated function, exact for its piecewise-linear
/// interpolant.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  CumulativeIntegral(const std::function<double(double)>& f, double t_max, std::size_t cells)
      : h_(t_max / static_cast<double>(cells)), values_(cells + 1), cumulative_(cells + 1, 0.0) {
    if (!(t_max > 0) || cells == 0) throw std::invalid_argument("CumulativeIntegral: bad grid");
    for (std::size_t i = 0; i <= cells; ++i) values_[i] = f(std::min(h_ * static_cast<double>(i), t_max));
    for (std::size_t i = 1; i <= cells; ++i)
      cumulative_[i] = cumulative_[i - 1] + 0.5 * h_ * (values_[i - 1] + values_[i]);
  }

  /// Integral over [0, t]; t is clamped to the table range.
  double operator()(double t) const {
    if (t <= 0) return 0.0;
    const double pos = t / h_;
    const auto last = static_cast<double>(values_.size() - 1);
    if (pos >= last) return cumulative_.back();
    const auto i = static_cast<std::size_t>(pos);
    const double s = (pos - static_cast<double>(i)) * h_;
    const double slope = (values_[i + 1] - values_[i]) / h_;
    return cumulative_[i] + s * values_[i] + 0.5 * slope * s * s;
  }

  /// Smallest t with integral(t) = target, for a nonnegative integrand.
  double inverse(double target) const {
    if (target <= 0) return 0.0;
    if (target >= cumulative_.back()) return h_ * static_cast<double>(values_.size() - 1);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double rem = target - cumulative_[i];
    const double f0 = values_[i];
    const double slope = (values_[i + 1] - values_[i]) / h_;
    double s;
    if (std::abs(slope) < 1e-14) {
      s = f0 > 0 ? rem / f0 : 0.0;
    } else {
      // Solve f0 s + slope s^2 / 2 = rem on [0, h].
      const double disc = std::max(0.0, f0 * f0 + 2 * slope * rem);
      s = 2 * rem / (f0 + std::sqrt(disc));
    }
    return h_ * static_cast<double>(i) + std::clamp(s, 0.0, h_);
  }

  double total() const { return cumulative_.back(); }

 private:
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

}  // namespace bfgraph
