#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "excursions.hpp"
#include "irg.hpp"
#include "ode.hpp"
#include "process.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "stats.hpp"

namespace bfgraph {

/// Reports keep keys in insertion order so CSV columns follow the code.
using json = nlohmann::ordered_json;

/// Runs fn(0..count-1) on a pool of worker threads and returns the results
/// in index order, so the output never depends on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, Fn&& fn, unsigned workers = std::thread::hardware_concurrency())
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-core cost model used to refuse oversized configurations.
struct CostModel {
  double seconds_per_event = 3e-7;
  double seconds_per_bm_step = 3e-8;
  double seconds_per_kernel = 1e-7;

  /// Two-choice process on n vertices run to time t.
  double two_choice(std::uint64_t n, double t) const {
    return seconds_per_event * 0.5 * static_cast<double>(n) * t + 1e-8 * static_cast<double>(n);
  }
  double rgiva(std::uint64_t n, double t) const { return 3 * two_choice(n, t); }
};

inline double workers_available() { return std::max(1u, std::thread::hardware_concurrency()); }

inline void enforce_budget(const std::string& name, double projected, double budget) {
  if (projected > budget)
    throw BudgetExceeded(name + ": projected runtime " + std::to_string(projected) + " s exceeds budget " +
                         std::to_string(budget) + " s");
}

/// One pass/fail decision recorded in a report, derivable from `value`.
struct Check {
  std::string name;
  double value = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool pass = false;
  std::string description;

  static Check within(std::string name, double value, double lower, double upper, std::string description) {
    return {std::move(name), value, lower, upper, value >= lower && value <= upper, std::move(description)};
  }
  static Check flag(std::string name, bool ok, std::string description) {
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, 1.0, ok, std::move(description)};
  }
};

inline json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct ExperimentReport {
  std::string name;
  json params = json::object();
  std::vector<json> cells;
  std::vector<Check> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check& check(const std::string& check_name) const {
    for (const auto& c : checks)
      if (c.name == check_name) return c;
    throw std::out_of_range("report " + name + " has no check " + check_name);
  }

  json to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks)
      checks_json.push_back({{"name", c.name},
                             {"value", c.value},
                             {"lower", bound_to_json(c.lower)},
                             {"upper", bound_to_json(c.upper)},
                             {"pass", c.pass},
                             {"description", c.description}});
    return {{"name", name}, {"params", params}, {"cells", cells}, {"checks", checks_json}, {"pass", pass()}};
  }

  /// One row per cell; columns are the scalar keys of the cells in order of
  /// first appearance. Array-valued entries are omitted.
  void write_csv(std::ostream& os) const {
    std::vector<std::string> columns;
    std::set<std::string> seen;
    for (const auto& cell : cells)
      for (auto it = cell.begin(); it != cell.end(); ++it)
        if (!it.value().is_array() && !it.value().is_object() && seen.insert(it.key()).second)
          columns.push_back(it.key());
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& cell : cells) {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) os << ',';
        if (!cell.contains(columns[i])) continue;
        const auto& v = cell.at(columns[i]);
        if (v.is_string()) os << v.get<std::string>();
        else os << v.dump();
      }
      os << '\n';
    }
  }
};

inline json summary(const std::vector<double>& v) {
  return {{"mean", stats::mean(v)},
          {"std_err", stats::std_err(v)},
          {"median", stats::median(v)},
          {"q10", stats::quantile(v, 0.1)},
          {"q90", stats::quantile(v, 0.9)}};
}

inline std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Critical window.

struct WindowConfig {
  std::vector<std::uint64_t> n_list{10'000, 100'000, 1'000'000};
  std::vector<double> lambda_list{0.0};
  std::size_t reps = 200;
  /// Independent (BF, excursion) sample pairs per cell; the KS distance of
  /// a cell is the median over batches.
  std::size_t batches = 5;
  double step = 5e-4;
  std::size_t top_k = 10;
  std::uint64_t seed = 1;
  double budget_seconds = 3600;
};

/// Rescaled largest BF components at t_c + alpha beta^{2/3} lambda n^{-1/3}
/// against the largest excursion xi_1(lambda), compared by two-sample KS.
inline ExperimentReport exp_critical_window(const WindowConfig& cfg, const CriticalConstants& cc = critical_constants(),
                                            const CostModel& cost = {}) {
  if (cfg.n_list.empty() || cfg.lambda_list.empty() || cfg.reps < 2 || cfg.batches < 1)
    throw std::invalid_argument("exp_critical_window: empty configuration");
  const auto n_list = sorted_unique(cfg.n_list);
  std::vector<double> lambdas = cfg.lambda_list;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  auto time_for = [&](std::uint64_t n, double lambda) {
    return cc.t_c + cc.alpha * std::pow(cc.beta, 2.0 / 3.0) * lambda / std::cbrt(static_cast<double>(n));
  };
  double projected = 0;
  for (auto n : n_list) {
    const double t = time_for(n, lambdas.back());
    if (t > cc.horizon()) throw std::invalid_argument("exp_critical_window: lambda pushes time past the horizon");
    if (time_for(n, lambdas.front()) < 0) throw std::invalid_argument("exp_critical_window: lambda gives negative time");
    projected += static_cast<double>(cfg.batches * cfg.reps) * cost.two_choice(n, t);
  }
  for (double lambda : lambdas)
    projected += static_cast<double>(cfg.batches * cfg.reps) * cost.seconds_per_bm_step *
                 default_excursion_horizon(lambda) / cfg.step;
  projected /= workers_available();
  enforce_budget("window", projected, cfg.budget_seconds);

  ExperimentReport rep;
  rep.name = "window";
  rep.params = {{"n", n_list},       {"lambda", lambdas},     {"reps", cfg.reps},
                {"batches", cfg.batches}, {"step", cfg.step}, {"top_k", cfg.top_k},
                {"seed", cfg.seed},  {"t_c", cc.t_c},         {"alpha", cc.alpha},
                {"beta", cc.beta},   {"expected_seconds", projected},
                {"tolerances", "empirical finite-n trend checks"}};

  // Excursion reference samples: [lambda][batch][rep].
  const std::size_t per_lambda = cfg.batches * cfg.reps;
  std::vector<std::vector<double>> xi(lambdas.size());
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const std::uint64_t base = replica_seed(cfg.seed, 0xE0000 + li);
    xi[li] = parallel_map(per_lambda, [&](std::size_t r) {
      return sample_excursions(lambdas[li], cfg.step, replica_seed(base, r)).largest();
    });
  }

  const double beta_third = std::cbrt(cc.beta);
  std::map<double, std::vector<double>> ks_median_by_lambda;
  std::map<double, std::vector<double>> median_by_lambda_at_largest_n;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::uint64_t n = n_list[ni];
    const double nd = static_cast<double>(n);
    std::vector<double> grid;
    for (double lambda : lambdas) grid.push_back(time_for(n, lambda));
    const std::uint64_t base = replica_seed(cfg.seed, 0xB0000 + ni);
    // One trajectory per replica serves every lambda: sizes only grow in time.
    auto runs = parallel_map(per_lambda, [&](std::size_t r) {
      ProcessConfig pc{n, grid.back(), replica_seed(base, r), grid, cc.horizon(), cfg.top_k};
      return run_bf(pc).samples;
    });
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      std::vector<double> largest, sq;
      std::vector<double> ks_values, p_values;
      for (std::size_t b = 0; b < cfg.batches; ++b) {
        std::vector<double> batch_bf, batch_xi;
        for (std::size_t r = b * cfg.reps; r < (b + 1) * cfg.reps; ++r) {
          const Stats& s = runs[r][li];
          const double rescaled = beta_third * static_cast<double>(s.max_size) / std::pow(nd, 2.0 / 3.0);
          batch_bf.push_back(rescaled);
          largest.push_back(rescaled);
          sq.push_back(std::pow(cc.beta, 2.0 / 3.0) * static_cast<double>(s.s2) / std::pow(nd, 4.0 / 3.0));
          batch_xi.push_back(xi[li][r]);
        }
        const auto ks = stats::ks_two_sample(batch_bf, batch_xi);
        ks_values.push_back(ks.statistic);
        p_values.push_back(ks.p_value);
      }
      std::vector<double> top_means;
      for (std::size_t k = 0; k < cfg.top_k; ++k) {
        double acc = 0;
        for (const auto& run : runs) {
          const auto& top = run[li].top;
          acc += k < top.size() ? beta_third * static_cast<double>(top[k]) / std::pow(nd, 2.0 / 3.0) : 0.0;
        }
        top_means.push_back(acc / static_cast<double>(runs.size()));
      }
      const double ks_median = stats::median(ks_values);
      ks_median_by_lambda[lambdas[li]].push_back(ks_median);
      rep.cells.push_back({{"n", n},
                           {"lambda", lambdas[li]},
                           {"t", grid[li]},
                           {"ks_median", ks_median},
                           {"ks_batches", ks_values},
                           {"ks_p_values", p_values},
                           {"largest_median", stats::median(largest)},
                           {"largest_mean", stats::mean(largest)},
                           {"xi1_median", stats::median(xi[li])},
                           {"xi1_mean", stats::mean(xi[li])},
                           {"sum_sq_median", stats::median(sq)},
                           {"top_k_means", top_means},
                           {"seed_base", base}});
      if (ni + 1 == n_list.size()) median_by_lambda_at_largest_n[lambdas[li]] = {stats::median(largest)};
    }
  }

  for (const auto& [lambda, medians] : ks_median_by_lambda) {
    if (lambda != 0.0 || n_list.size() < 2) continue;
    rep.checks.push_back(Check::flag("ks_decreasing_lambda0", stats::strictly_decreasing(medians),
                                     "median KS distance to xi_1(0) strictly decreases in n"));
  }
  if (median_by_lambda_at_largest_n.count(-4.0) && median_by_lambda_at_largest_n.count(1.0)) {
    const double lo = median_by_lambda_at_largest_n[-4.0][0], hi = median_by_lambda_at_largest_n[1.0][0];
    rep.checks.push_back(Check::flag("median_ordering", lo < hi, "median rescaled largest at lambda=-4 below lambda=+1"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Moments just below the window.

struct PropMainConfig {
  std::vector<std::uint64_t> n_list{10'000, 100'000, 1'000'000};
  double gamma = 0.18;
  std::size_t reps = 50;
  std::uint64_t seed = 2;
  double ratio_lower = 0.65;
  double ratio_upper = 0.88;
  double max_ratio_bound = 0.1;
  double budget_seconds = 3600;
};

/// At t_n = t_c - n^{-gamma}: n^2 S3 / S2^3 (target beta),
/// n^{4/3}/S2 - n^{1/3-gamma}/alpha (target 0) and n^{2/3} I_n / S2 (target 0).
inline ExperimentReport exp_prop_main(const PropMainConfig& cfg, const CriticalConstants& cc = critical_constants(),
                                      const CostModel& cost = {}) {
  if (!(cfg.gamma > 1.0 / 6 && cfg.gamma < 1.0 / 5)) throw std::invalid_argument("exp_prop_main: gamma must lie in (1/6, 1/5)");
  if (cfg.n_list.empty() || cfg.reps < 1) throw std::invalid_argument("exp_prop_main: empty configuration");
  const auto n_list = sorted_unique(cfg.n_list);
  double projected = 0;
  for (auto n : n_list) projected += static_cast<double>(cfg.reps) * cost.two_choice(n, cc.t_c);
  projected /= workers_available();
  enforce_budget("prop-main", projected, cfg.budget_seconds);

  ExperimentReport rep;
  rep.name = "prop-main";
  rep.params = {{"n", n_list},        {"gamma", cfg.gamma}, {"reps", cfg.reps},
                {"seed", cfg.seed},   {"t_c", cc.t_c},       {"alpha", cc.alpha},
                {"beta", cc.beta},    {"ratio_band", {cfg.ratio_lower, cfg.ratio_upper}},
                {"max_ratio_bound", cfg.max_ratio_bound}, {"expected_seconds", projected}};

  std::vector<double> ratio_med, s2_med, max_med;
  bool power_mean_ok = true;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::uint64_t n = n_list[ni];
    const double nd = static_cast<double>(n);
    const double t_n = cc.t_c - std::pow(nd, -cfg.gamma);
    const std::uint64_t base = replica_seed(cfg.seed, ni);
    auto samples = parallel_map(cfg.reps, [&](std::size_t r) {
      return run_bf(ProcessConfig{n, t_n, replica_seed(base, r), {t_n}, cc.horizon()}).samples.front();
    });
    std::vector<double> ratio, s2_stat, max_stat;
    for (const auto& s : samples) {
      const double s2 = static_cast<double>(s.s2), s3 = static_cast<double>(s.s3);
      ratio.push_back(nd * nd * s3 / (s2 * s2 * s2));
      s2_stat.push_back(std::pow(nd, 4.0 / 3.0) / s2 - std::pow(nd, 1.0 / 3.0 - cfg.gamma) / cc.alpha);
      max_stat.push_back(std::pow(nd, 2.0 / 3.0) * static_cast<double>(s.max_size) / s2);
      // S3 >= S2^2 / S1 with S1 = n (Cauchy-Schwarz).
      if (s3 * nd < s2 * s2 * (1 - 1e-12)) power_mean_ok = false;
    }
    ratio_med.push_back(stats::median(ratio));
    s2_med.push_back(stats::median(s2_stat));
    max_med.push_back(stats::median(max_stat));
    rep.cells.push_back({{"n", n},
                         {"t_n", t_n},
                         {"s3_s2_ratio", summary(ratio)},
                         {"s3_s2_ratio_median", ratio_med.back()},
                         {"s2_deviation", summary(s2_stat)},
                         {"s2_deviation_median", s2_med.back()},
                         {"max_over_s2", summary(max_stat)},
                         {"max_over_s2_median", max_med.back()},
                         {"seed_base", base}});
  }
  rep.checks.push_back(Check::within("s3_s2_ratio_at_largest_n", ratio_med.back(), cfg.ratio_lower, cfg.ratio_upper,
                                     "median n^2 S3/S2^3 at the largest n, target beta"));
  rep.checks.push_back(Check::within("max_over_s2_at_largest_n", max_med.back(),
                                     -std::numeric_limits<double>::infinity(), cfg.max_ratio_bound,
                                     "median n^{2/3} I_n / S2 at the largest n"));
  if (n_list.size() >= 2) {
    auto distance_to = [](const std::vector<double>& v, double target) {
      std::vector<double> d;
      for (double x : v) d.push_back(std::abs(x - target));
      return d;
    };
    rep.checks.push_back(Check::flag("max_over_s2_decreasing", stats::strictly_decreasing(max_med),
                                     "median n^{2/3} I_n / S2 strictly decreases in n"));
    rep.checks.push_back(Check::flag("s3_s2_ratio_approaches_beta", stats::strictly_decreasing(distance_to(ratio_med, cc.beta)),
                                     "|median n^2 S3/S2^3 - beta| strictly decreases in n"));
    rep.checks.push_back(Check::flag("s2_deviation_approaches_zero", stats::strictly_decreasing(distance_to(s2_med, 0.0)),
                                     "|median n^{4/3}/S2 - n^{1/3-gamma}/alpha| strictly decreases in n"));
  }
  rep.checks.push_back(Check::flag("power_mean_bound", power_mean_ok, "S3 >= S2^2/n in every replica"));
  return rep;
}

// ---------------------------------------------------------------------------
// Largest component through the subcritical phase.

enum class Model { bohman_frieze, erdos_renyi };

struct SubcriticalConfig {
  std::vector<std::uint64_t> n_list{10'000, 100'000, 1'000'000};
  double gamma = 0.18;
  std::size_t reps = 20;
  std::size_t grid_points = 40;
  Model model = Model::bohman_frieze;
  std::uint64_t seed = 3;
  double budget_seconds = 3600;
};

/// Sup over a time grid in (0, t_c - n^{-gamma}] of I_n(t) (t_c - t)^2 / (log n)^4.
inline ExperimentReport exp_subcritical_max(const SubcriticalConfig& cfg,
                                            const CriticalConstants& cc = critical_constants(),
                                            const CostModel& cost = {}) {
  if (!(cfg.gamma > 0 && cfg.gamma < 1.0 / 5)) throw std::invalid_argument("exp_subcritical_max: gamma must lie in (0, 1/5)");
  if (cfg.n_list.empty() || cfg.reps < 1 || cfg.grid_points < 2)
    throw std::invalid_argument("exp_subcritical_max: empty configuration");
  const auto n_list = sorted_unique(cfg.n_list);
  const bool er = cfg.model == Model::erdos_renyi;
  const double t_c = er ? find_tc_er() : cc.t_c;
  double projected = 0;
  for (auto n : n_list) projected += static_cast<double>(cfg.reps) * cost.two_choice(n, t_c);
  projected /= workers_available();
  enforce_budget("subcritical-max", projected, cfg.budget_seconds);

  ExperimentReport rep;
  rep.name = "subcritical-max";
  rep.params = {{"n", n_list},           {"gamma", cfg.gamma}, {"reps", cfg.reps},
                {"grid_points", cfg.grid_points}, {"model", er ? "er" : "bf"}, {"seed", cfg.seed},
                {"t_c", t_c},            {"expected_seconds", projected}};

  std::vector<double> nd_list, median_sup;
  double ratio_at_half_worst = 0;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::uint64_t n = n_list[ni];
    const double nd = static_cast<double>(n);
    const double t_end = t_c - std::pow(nd, -cfg.gamma);
    std::vector<double> grid;
    for (std::size_t k = 1; k < cfg.grid_points; ++k)
      grid.push_back(t_end * static_cast<double>(k) / static_cast<double>(cfg.grid_points));
    grid.push_back(t_end);
    if (0.5 < t_end && std::find(grid.begin(), grid.end(), 0.5) == grid.end()) {
      grid.push_back(0.5);
      std::sort(grid.begin(), grid.end());
    }
    const double log4 = std::pow(std::log(nd), 4);
    const std::uint64_t base = replica_seed(cfg.seed, ni);
    auto runs = parallel_map(cfg.reps, [&](std::size_t r) {
      ProcessConfig pc{n, t_end, replica_seed(base, r), grid, cc.horizon()};
      return er ? run_er(pc).samples : run_bf(pc).samples;
    });
    std::vector<double> sups, at_half;
    for (const auto& samples : runs) {
      double sup = 0;
      for (const auto& s : samples) {
        const double ratio = static_cast<double>(s.max_size) * (t_c - s.t) * (t_c - s.t) / log4;
        sup = std::max(sup, ratio);
        if (s.t == 0.5) at_half.push_back(ratio);
      }
      sups.push_back(sup);
    }
    nd_list.push_back(nd);
    median_sup.push_back(stats::median(sups));
    json cell = {{"n", n},
                 {"t_end", t_end},
                 {"sup_ratio", summary(sups)},
                 {"sup_ratio_median", median_sup.back()},
                 {"B_hat", *std::max_element(sups.begin(), sups.end())},
                 {"seed_base", base}};
    if (!at_half.empty()) {
      cell["ratio_at_half_median"] = stats::median(at_half);
      ratio_at_half_worst = std::max(ratio_at_half_worst, *std::max_element(at_half.begin(), at_half.end()));
    }
    rep.cells.push_back(std::move(cell));
  }
  if (n_list.size() >= 2) {
    const auto fit = stats::log_log_fit(nd_list, median_sup);
    rep.checks.push_back(Check::within("sup_ratio_trend", fit.slope, -std::numeric_limits<double>::infinity(), 0.0,
                                       "log-log slope of the median sup ratio against n is not positive"));
  }
  rep.checks.push_back(Check::within("ratio_at_half", ratio_at_half_worst, 0.0, 0.01,
                                     "largest ratio at t = 0.5 over all replicas"));
  return rep;
}

// ---------------------------------------------------------------------------
// Operator norm along time.

struct RhoCurveConfig {
  std::vector<double> t_grid;
  std::size_t m = 2000;
  std::size_t repetitions = 4;
  std::uint64_t seed = 4;
  double root_tolerance = 0.05;
  double convexity_sigmas = 3.0;
  double max_violation_fraction = 0.05;
  double budget_seconds = 3600;
};

inline std::vector<double> default_rho_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(0.1 * i);
  return g;
}

/// Linear-interpolated first crossing of `level`; NaN when none.
inline double first_crossing(const std::vector<double>& t, const std::vector<double>& v, double level) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (v[i - 1] < level && v[i] >= level) return t[i - 1] + (t[i] - t[i - 1]) * (level - v[i - 1]) / (v[i] - v[i - 1]);
  return std::numeric_limits<double>::quiet_NaN();
}

inline ExperimentReport exp_rho_curve(const RhoCurveConfig& cfg, const CriticalConstants& cc = critical_constants(),
                                      const CostModel& cost = {}) {
  std::vector<double> grid = cfg.t_grid.empty() ? default_rho_grid() : cfg.t_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 0 || grid.back() > cc.horizon()) throw std::invalid_argument("exp_rho_curve: grid outside [0, T]");
  const double md = static_cast<double>(cfg.m);
  const double projected = static_cast<double>(grid.size() * cfg.repetitions) * md * md * 0.5 * cost.seconds_per_kernel;
  enforce_budget("rho", projected, cfg.budget_seconds);

  const auto rates = RateFunctions::bohman_frieze(cc.horizon());
  ExperimentReport rep;
  rep.name = "rho";
  rep.params = {{"t", grid},        {"m", cfg.m},  {"repetitions", cfg.repetitions},
                {"seed", cfg.seed}, {"t_c", cc.t_c}, {"root_tolerance", cfg.root_tolerance},
                {"convexity_sigmas", cfg.convexity_sigmas},
                {"max_violation_fraction", cfg.max_violation_fraction}, {"expected_seconds", projected}};

  const RhoOptions opt{cfg.repetitions};
  auto estimates = parallel_map(grid.size(), [&](std::size_t i) {
    return estimate_rho(rates, grid[i], cfg.m, replica_seed(cfg.seed, i), opt);
  });
  std::vector<double> rho, se;
  for (const auto& e : estimates) {
    rho.push_back(e.rho_hat);
    se.push_back(e.std_err);
    rep.cells.push_back({{"t", e.t}, {"rho_hat", e.rho_hat}, {"std_err", e.std_err}, {"m", e.m}});
  }

  if (grid.front() == 0.0)
    rep.checks.push_back(Check::within("rho_at_zero", rho.front(), 0.0, 0.0, "rho_hat(0) is exactly 0"));
  const double root = first_crossing(grid, rho, 1.0);
  const double root_error = std::isnan(root) ? std::numeric_limits<double>::infinity() : std::abs(root - cc.t_c);
  rep.params["root"] = std::isnan(root) ? json(nullptr) : json(root);
  rep.checks.push_back(Check::within("root_near_tc", root_error, 0.0, cfg.root_tolerance,
                                     "|root of rho_hat = 1 minus t_c|"));

  std::size_t triples = 0, violations = 0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double wl = (grid[i + 1] - grid[i]) / (grid[i + 1] - grid[i - 1]);
    const double wr = 1 - wl;
    const double chord = wl * rho[i - 1] + wr * rho[i + 1];
    const double sd = std::sqrt(se[i] * se[i] + wl * wl * se[i - 1] * se[i - 1] + wr * wr * se[i + 1] * se[i + 1]);
    ++triples;
    if (rho[i] > chord + cfg.convexity_sigmas * sd) ++violations;
  }
  const double fraction = triples ? static_cast<double>(violations) / static_cast<double>(triples) : 0.0;
  rep.params["convexity_violations"] = violations;
  rep.checks.push_back(Check::within("convexity_violation_fraction", fraction, 0.0, cfg.max_violation_fraction,
                                     "fraction of grid triples above the chord by more than the sigma band"));
  bool monotone = true;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (rho[i - 1] > rho[i] + 2 * std::hypot(se[i - 1], se[i])) monotone = false;
  rep.checks.push_back(Check::flag("monotone", monotone, "rho_hat nondecreasing within 2 standard errors"));
  return rep;
}

// ---------------------------------------------------------------------------
// RGIVA sandwich around the non-singleton part of BF.

struct SandwichConfig {
  std::uint64_t n = 100'000;
  double delta = 0.05;
  double t = 0.9;
  std::size_t reps = 40;
  std::uint64_t seed = 5;
  double sigmas = 2.0;
  double budget_seconds = 3600;
};

struct ComponentSummary {
  double max_size = 0;
  double s2 = 0;
};

inline ExperimentReport exp_coupling_sandwich(const SandwichConfig& cfg, const CriticalConstants& cc = critical_constants(),
                                              const CostModel& cost = {}) {
  if (!(cfg.delta >= 0 && cfg.delta < 0.2)) throw std::invalid_argument("exp_coupling_sandwich: delta must lie in [0, 0.2)");
  if (cfg.reps < 2) throw std::invalid_argument("exp_coupling_sandwich: reps must be >= 2");
  if (!(cfg.t > 0) || cfg.t > cc.horizon()) throw std::invalid_argument("exp_coupling_sandwich: t outside (0, T]");
  const double projected = static_cast<double>(cfg.reps) * (cost.two_choice(cfg.n, cfg.t) + 2 * cost.rgiva(cfg.n, cfg.t)) /
                           workers_available();
  enforce_budget("sandwich", projected, cfg.budget_seconds);

  const auto base_rates = RateFunctions::bohman_frieze(cc.horizon());
  const auto lower = base_rates.shifted(-cfg.delta);
  const auto upper = base_rates.shifted(cfg.delta);

  ExperimentReport rep;
  rep.name = "sandwich";
  rep.params = {{"n", cfg.n},       {"delta", cfg.delta}, {"t", cfg.t},
                {"reps", cfg.reps}, {"seed", cfg.seed},   {"sigmas", cfg.sigmas},
                {"expected_seconds", projected}};

  auto summarize = [](const Stats& s) {
    // Singletons contribute 1 each to S2; the rest is the non-singleton part.
    const double max_size = s.max_size >= 2 ? static_cast<double>(s.max_size) : 0.0;
    return ComponentSummary{max_size, static_cast<double>(s.s2 - s.singletons)};
  };
  const std::vector<double> grid{cfg.t};
  auto com = parallel_map(cfg.reps, [&](std::size_t r) {
    return summarize(run_bf(ProcessConfig{cfg.n, cfg.t, replica_seed(cfg.seed, 3 * r), grid, cc.horizon()}).samples.front());
  });
  auto ia_lower = parallel_map(cfg.reps, [&](std::size_t r) {
    return summarize(run_rgiva(ProcessConfig{cfg.n, cfg.t, replica_seed(cfg.seed, 3 * r + 1), grid}, lower).samples.front());
  });
  auto ia_upper = parallel_map(cfg.reps, [&](std::size_t r) {
    return summarize(run_rgiva(ProcessConfig{cfg.n, cfg.t, replica_seed(cfg.seed, 3 * r + 2), grid}, upper).samples.front());
  });

  struct Column {
    std::vector<double> max_size, s2;
  };
  auto column = [](const std::vector<ComponentSummary>& v) {
    Column c;
    for (const auto& e : v) c.max_size.push_back(e.max_size), c.s2.push_back(e.s2);
    return c;
  };
  const Column lo = column(ia_lower), mid = column(com), hi = column(ia_upper);
  auto frac_small = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double m) { return m <= 4; })) /
           static_cast<double>(v.size());
  };
  const std::pair<const char*, const Column*> models[] = {{"ia_lower", &lo}, {"com", &mid}, {"ia_upper", &hi}};
  for (const auto& [label, col] : models)
    rep.cells.push_back({{"model", label},
                         {"max_size", summary(col->max_size)},
                         {"max_size_mean", stats::mean(col->max_size)},
                         {"s2", summary(col->s2)},
                         {"s2_mean", stats::mean(col->s2)},
                         {"frac_max_le_4", frac_small(col->max_size)}});

  auto ordered = [&](const std::vector<double>& a, const std::vector<double>& b) {
    // mean(a) <= mean(b) up to `sigmas` combined standard errors.
    const double gap = stats::mean(a) - stats::mean(b);
    return gap / std::max(std::hypot(stats::std_err(a), stats::std_err(b)), 1e-300);
  };
  const double inf = std::numeric_limits<double>::infinity();
  rep.checks.push_back(Check::within("max_lower_le_com", ordered(lo.max_size, mid.max_size), -inf, cfg.sigmas,
                                     "standardized gap mean max(IA lower) - mean max(COM)"));
  rep.checks.push_back(Check::within("max_com_le_upper", ordered(mid.max_size, hi.max_size), -inf, cfg.sigmas,
                                     "standardized gap mean max(COM) - mean max(IA upper)"));
  rep.checks.push_back(Check::within("s2_lower_le_com", ordered(lo.s2, mid.s2), -inf, cfg.sigmas,
                                     "standardized gap mean S2(IA lower) - mean S2(COM)"));
  rep.checks.push_back(Check::within("s2_com_le_upper", ordered(mid.s2, hi.s2), -inf, cfg.sigmas,
                                     "standardized gap mean S2(COM) - mean S2(IA upper)"));
  return rep;
}

// ---------------------------------------------------------------------------
// Erdos-Renyi scaling at criticality.

struct ErScalingConfig {
  std::vector<std::uint64_t> n_list{10'000, 100'000, 1'000'000};
  double t = 1.0;
  std::size_t reps = 30;
  std::uint64_t seed = 6;
  double slope_lower = 0.55;
  double slope_upper = 0.80;
  double budget_seconds = 3600;
};

/// Log-log slope of the mean largest ER component against n at time t.
inline ExperimentReport exp_er_scaling(const ErScalingConfig& cfg, const CriticalConstants& cc = critical_constants(),
                                       const CostModel& cost = {}) {
  const auto n_list = sorted_unique(cfg.n_list);
  if (n_list.size() < 2 || cfg.reps < 1) throw std::invalid_argument("exp_er_scaling: need >= 2 sizes");
  double projected = 0;
  for (auto n : n_list) projected += static_cast<double>(cfg.reps) * cost.two_choice(n, cfg.t);
  projected /= workers_available();
  enforce_budget("er-scaling", projected, cfg.budget_seconds);

  ExperimentReport rep;
  rep.name = "er-scaling";
  rep.params = {{"n", n_list}, {"t", cfg.t}, {"reps", cfg.reps}, {"seed", cfg.seed}, {"expected_seconds", projected}};
  std::vector<double> nd, means;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::uint64_t n = n_list[ni];
    const std::uint64_t base = replica_seed(cfg.seed, ni);
    auto maxima = parallel_map(cfg.reps, [&](std::size_t r) {
      return static_cast<double>(
          run_er(ProcessConfig{n, cfg.t, replica_seed(base, r), {cfg.t}, cc.horizon()}).samples.front().max_size);
    });
    nd.push_back(static_cast<double>(n));
    means.push_back(stats::mean(maxima));
    rep.cells.push_back({{"n", n}, {"max_size", summary(maxima)}, {"max_size_mean", means.back()}, {"seed_base", base}});
  }
  const auto fit = stats::log_log_fit(nd, means);
  rep.params["slope"] = fit.slope;
  rep.checks.push_back(Check::within("log_log_slope", fit.slope, cfg.slope_lower, cfg.slope_upper,
                                     "slope of log mean largest component against log n"));
  return rep;
}

}  // namespace bfgraph
