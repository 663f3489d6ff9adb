#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace bfgraph::stats {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double acc = 0;
  for (double e : v) acc += e;
  return acc / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0;
  for (double e : v) acc += (e - m) * (e - m);
  return acc / static_cast<double>(v.size() - 1);
}

inline double std_err(std::span<const double> v) {
  return v.size() < 2 ? 0.0 : std::sqrt(variance(v) / static_cast<double>(v.size()));
}

/// Linear-interpolated quantile (type 7), q in [0, 1].
inline double quantile(std::span<const double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(i);
  return s[i] + frac * (s[i + 1] - s[i]);
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

struct KsResult {
  double statistic;
  double p_value;
};

/// Asymptotic Kolmogorov tail P(K > x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_tail(double x) {
  if (x <= 0) return 1.0;
  if (x < 0.27) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic
/// distribution with Stephens' small-sample correction.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}

struct LinearFit {
  double slope;
  double intercept;
  double slope_se;
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("linear_fit: constant abscissa");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - intercept - slope * x[i];
    rss += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx)
                                 : std::numeric_limits<double>::infinity();
  return {slope, intercept, se};
}

/// Log-log slope of y against x.
inline LinearFit log_log_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

inline bool strictly_decreasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace bfgraph::stats
