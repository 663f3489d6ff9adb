// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here. An optional argument names a
// directory that receives every experiment report as JSON.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "bfgraph/coalescent.hpp"
#include "bfgraph/component_tracker.hpp"
#include "bfgraph/experiments.hpp"
#include "bfgraph/irg.hpp"
#include "bfgraph/ode.hpp"
#include "bfgraph/process.hpp"

using namespace bfgraph;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::filesystem::path report_dir;

void save(const ExperimentReport& rep) {
  if (report_dir.empty()) return;
  std::ofstream(report_dir / (rep.name + ".json")) << rep.to_json().dump(2) << '\n';
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome ode_constants() {
  const auto start = std::chrono::steady_clock::now();
  const auto sol = solve_system();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = std::abs(sol.t_c - 1.1763) <= 1e-3 && std::abs(sol.alpha - 1.063) <= 5e-3 &&
                  std::abs(sol.beta - 0.764) <= 1e-2 && seconds < 5;
  return {ok, fmt("t_c=%.6f alpha=%.6f beta=%.6f time=%.2fs (targets 1.1763+-0.001, 1.063+-0.005, 0.764+-0.01, <5s)",
                  sol.t_c, sol.alpha, sol.beta, seconds)};
}

Outcome er_sanity() {
  ErScalingConfig cfg;
  const auto rep = exp_er_scaling(cfg);
  save(rep);
  const auto& c = rep.check("log_log_slope");
  return {c.pass, fmt("slope=%.4f (band [%.2f, %.2f])", c.value, c.lower, c.upper)};
}

Outcome rho_criticality() {
  RhoCurveConfig cfg;
  cfg.m = 2000;
  const auto rep = exp_rho_curve(cfg);
  save(rep);
  const auto& zero = rep.check("rho_at_zero");
  const auto& root = rep.check("root_near_tc");
  const auto& convex = rep.check("convexity_violation_fraction");
  const double r = rep.params.at("root").is_null() ? NAN : rep.params.at("root").get<double>();
  return {zero.pass && root.pass && convex.pass,
          fmt("rho(0)=%g root=%.4f |root-t_c|=%.4f (<=0.05) convexity violations=%.3f (<=0.05)", zero.value, r,
              root.value, convex.value)};
}

Outcome prop_main() {
  PropMainConfig cfg;
  cfg.gamma = 0.18;
  cfg.reps = 50;
  const auto rep = exp_prop_main(cfg);
  save(rep);
  const auto& ratio = rep.check("s3_s2_ratio_at_largest_n");
  const auto& max_bound = rep.check("max_over_s2_at_largest_n");
  const auto& max_trend = rep.check("max_over_s2_decreasing");
  std::string medians;
  for (const auto& cell : rep.cells) medians += fmt(" %.4f", cell.at("max_over_s2_median").get<double>());
  return {ratio.pass && max_bound.pass && max_trend.pass,
          fmt("median n^2 S3/S2^3=%.4f (band [0.65, 0.88]); median n^{2/3} max/S2 by n:%s (need <0.1 at 1e6 and "
              "decreasing)",
              ratio.value, medians.c_str())};
}

Outcome subcritical() {
  SubcriticalConfig cfg;
  cfg.gamma = 0.18;
  const auto rep = exp_subcritical_max(cfg);
  save(rep);
  const auto& trend = rep.check("sup_ratio_trend");
  std::string medians;
  for (const auto& cell : rep.cells) medians += fmt(" %.3g", cell.at("sup_ratio_median").get<double>());
  return {trend.pass, fmt("log-log slope of median sup ratio=%.4f (<=0); medians by n:%s", trend.value, medians.c_str())};
}

Outcome window() {
  WindowConfig cfg;
  cfg.lambda_list = {0.0};
  cfg.reps = 200;
  cfg.step = 5e-4;
  const auto rep = exp_critical_window(cfg);
  save(rep);
  const auto& trend = rep.check("ks_decreasing_lambda0");
  std::string medians;
  for (const auto& cell : rep.cells) medians += fmt(" %.4f", cell.at("ks_median").get<double>());
  return {trend.pass, fmt("median KS by n:%s (strictly decreasing required)", medians.c_str())};
}

Outcome property_suites() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> failures;

  // Tracker against recounting from explicit labels.
  for (std::uint64_t seq = 0; seq < 1000; ++seq) {
    Engine rng = make_engine(replica_seed(101, seq));
    const std::size_t n = 2 + uniform_below(rng, 300);
    ComponentTracker tr(n);
    std::vector<std::size_t> label(n);
    std::iota(label.begin(), label.end(), 0);
    bool ok = true;
    for (std::size_t s = 0, steps = uniform_below(rng, 2 * n); s < steps && ok; ++s) {
      const auto u = static_cast<Vertex>(uniform_below(rng, n)), v = static_cast<Vertex>(uniform_below(rng, n));
      tr.merge(u, v);
      const auto from = label[v], to = label[u];
      for (auto& l : label)
        if (l == from) l = to;
      std::vector<std::uint64_t> count(n, 0);
      for (auto l : label) ++count[l];
      std::uint64_t s2 = 0, s3 = 0, mx = 0, singles = 0;
      for (auto c : count) s2 += c * c, s3 += c * c * c, mx = std::max(mx, c), singles += c == 1;
      ok = tr.s2() == s2 && tr.s3() == s3 && tr.max_size() == mx && tr.singleton_count() == singles;
    }
    if (!ok) {
      failures.push_back("tracker sequence " + std::to_string(seq));
      break;
    }
  }

  // Coalescent mass conservation and Exp(ab) merge time.
  {
    Engine rng = make_engine(102);
    for (int r = 0; r < 200; ++r) {
      std::vector<double> raw(1 + uniform_below(rng, 40));
      for (auto& v : raw) v = exponential(rng, 1.0);
      const auto x0 = order_mass(raw);
      const auto x = simulate_coalescent(x0, 2.0, replica_seed(103, r));
      if (std::abs(x.total() - x0.total()) > 1e-12 * x0.total()) {
        failures.push_back("coalescent mass");
        break;
      }
    }
    std::vector<double> times;
    const auto pair = order_mass(std::vector<double>{2, 3});
    for (int r = 0; r < 10'000; ++r) times.push_back(run_coalescent(pair, 1e9, replica_seed(104, r)).merge_times.front());
    if (std::abs(stats::mean(times) - 1.0 / 6) > 3 * stats::std_err(times)) failures.push_back("coalescent Exp(6) mean");
  }

  // Branching volume against the IRG component of the same root type.
  {
    const auto rates = RateFunctions::bohman_frieze();
    const ClusterSpace space(rates, 0.8);
    Engine rng = make_engine(105);
    std::vector<double> bp, irg;
    for (int r = 0; r < 1000; ++r) {
      const auto x0 = space.sample(rng);
      bp.push_back(sample_bp_volume(x0, space, replica_seed(106, r)).volume);
      irg.push_back(sample_irg_with(1'000, space, x0, replica_seed(107, r)).marked_volume);
    }
    if (stats::mean(bp) + 2 * std::hypot(stats::std_err(bp), stats::std_err(irg)) < stats::mean(irg))
      failures.push_back(fmt("bp mean %.3f below irg mean %.3f", stats::mean(bp), stats::mean(irg)));
  }

  // RGIVA with immigration only.
  {
    const auto rates = RateFunctions::constant(0.7, 0.0, 0.0, 2.0);
    const auto tr = run_rgiva(ProcessConfig{50'000, 1.5, 108, {}}, rates);
    for (auto s : tr.terminal.component_sizes())
      if (s != 2) {
        failures.push_back("rgiva non-doubleton component");
        break;
      }
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds >= 120) failures.push_back(fmt("runtime %.1fs", seconds));
  std::string detail = fmt("time=%.1fs (<120s)", seconds);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    report_dir = argv[1];
    std::filesystem::create_directories(report_dir);
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ode-constants", ode_constants},     {"er-scaling", er_sanity},     {"rho-criticality", rho_criticality},
      {"prop-main", prop_main},             {"subcritical-max", subcritical}, {"critical-window", window},
      {"property-suites", property_suites},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << ": " << out.detail << fmt(" [%.1fs]", seconds) << std::endl;
    failed += !out.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size() << std::endl;
  return failed ? 1 : 0;
}
