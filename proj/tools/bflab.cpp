// Command-line driver for the simulators and the experiment reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bfgraph/coalescent.hpp"
#include "bfgraph/excursions.hpp"
#include "bfgraph/experiments.hpp"
#include "bfgraph/irg.hpp"
#include "bfgraph/ode.hpp"
#include "bfgraph/process.hpp"

namespace {

using namespace bfgraph;

struct Common {
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 1;
  double budget_seconds = 3600;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out, "Output path (stdout when omitted)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--budget-seconds", c.budget_seconds, "Refuse runs projected above this wall time");
}

template <class Writer>
void emit(const Common& c, Writer&& write) {
  if (c.out.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(c.out);
  if (!file) throw std::runtime_error("cannot open " + c.out);
  write(file);
}

void emit_json(const Common& c, const json& j) {
  emit(c, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

int emit_report(const Common& c, const ExperimentReport& rep) {
  if (c.format == "csv") emit(c, [&](std::ostream& os) { rep.write_csv(os); });
  else emit_json(c, rep.to_json());
  for (const auto& chk : rep.checks)
    std::cerr << (chk.pass ? "PASS " : "FAIL ") << rep.name << '/' << chk.name << " value=" << chk.value << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohman-Frieze process simulator and critical-window experiments"};
  app.require_subcommand(1);

  // ode
  Common ode_c;
  double ode_tol = 1e-10;
  auto* ode = app.add_subcommand("ode", "Critical constants; csv format emits the solution grid");
  add_common(ode, ode_c);
  ode->add_option("--tol", ode_tol, "Absolute and relative step tolerance");
  ode->callback([&] {
    OdeTolerances tol;
    tol.abs_tol = tol.rel_tol = ode_tol;
    const auto sol = solve_system(tol);
    if (ode_c.format == "csv") {
      emit(ode_c, [&](std::ostream& os) {
        os.precision(17);
        os << "t,x,s2,s3,y,z\n";
        for (std::size_t i = 0; i < sol.t.size(); ++i)
          os << sol.t[i] << ',' << sol.x[i] << ',' << sol.s2[i] << ',' << sol.s3[i] << ',' << sol.y[i] << ','
             << sol.z[i] << '\n';
      });
    } else {
      emit_json(ode_c, {{"t_c", sol.t_c}, {"alpha", sol.alpha}, {"beta", sol.beta}, {"x_at_tc", sol.x_at_tc}});
    }
  });

  // rho
  Common rho_c;
  RhoCurveConfig rho_cfg;
  auto* rho = app.add_subcommand("rho", "Operator norm estimates on a time grid");
  add_common(rho, rho_c);
  rho_c.format = "csv";
  rho->add_option("--t", rho_cfg.t_grid, "Time grid (comma separated)")->delimiter(',');
  rho->add_option("--m", rho_cfg.m, "Clusters per Nystrom sample");
  rho->add_option("--reps", rho_cfg.repetitions, "Independent samples per time");
  rho->callback([&] {
    rho_cfg.seed = rho_c.seed;
    rho_cfg.budget_seconds = rho_c.budget_seconds;
    emit_report(rho_c, exp_rho_curve(rho_cfg));
  });

  // simulate
  Common sim_c;
  std::uint64_t sim_n = 100'000;
  double sim_t = 0;
  std::size_t sim_points = 200;
  std::string sim_model = "bf";
  auto* sim = app.add_subcommand("simulate", "One trajectory of the BF, ER or RGIVA process");
  add_common(sim, sim_c);
  sim_c.format = "csv";
  sim->add_option("--n", sim_n, "Number of vertices");
  sim->add_option("--t-end", sim_t, "End time (default t_c)");
  sim->add_option("--points", sim_points, "Grid points");
  sim->add_option("--model", sim_model, "Process")->check(CLI::IsMember({"bf", "er", "rgiva"}));
  sim->callback([&] {
    const auto& cc = critical_constants();
    const double t_end = sim_t > 0 ? sim_t : cc.t_c;
    ProcessConfig pc{sim_n, t_end, sim_c.seed, uniform_grid(t_end, sim_points), cc.horizon()};
    enforce_budget("simulate", CostModel{}.rgiva(sim_n, t_end), sim_c.budget_seconds);
    const Trajectory tr = sim_model == "bf"   ? run_bf(pc)
                          : sim_model == "er" ? run_er(pc)
                                              : run_rgiva(pc, RateFunctions::bohman_frieze(cc.horizon()));
    if (sim_c.format == "csv") emit(sim_c, [&](std::ostream& os) { write_csv(os, tr); });
    else emit_json(sim_c, to_json(tr));
  });

  // coalescent
  Common coal_c;
  std::vector<double> masses{1, 1};
  double duration = 1;
  auto* coal = app.add_subcommand("coalescent", "Multiplicative coalescent from given masses");
  add_common(coal, coal_c);
  coal->add_option("--masses", masses, "Initial masses (comma separated)")->delimiter(',');
  coal->add_option("--duration", duration, "Run time");
  coal->callback([&] {
    const auto run = run_coalescent(order_mass(masses), duration, coal_c.seed);
    emit_json(coal_c, run.masses.masses());
  });

  // excursions
  Common exc_c;
  double exc_lambda = 0, exc_step = 5e-4, exc_horizon = 0;
  auto* exc = app.add_subcommand("excursions", "Excursion lengths of the reflected parabolic Brownian path");
  add_common(exc, exc_c);
  exc->add_option("--lambda", exc_lambda, "Drift parameter");
  exc->add_option("--step", exc_step, "Grid step");
  exc->add_option("--horizon", exc_horizon, "Path length (default max(10, 2 lambda + 10))");
  exc->callback([&] {
    const double h = exc_horizon > 0 ? exc_horizon : default_excursion_horizon(exc_lambda);
    emit_json(exc_c, sample_excursions(exc_lambda, h, exc_step, exc_c.seed).lengths);
  });

  // irg-sample
  Common irg_c;
  std::uint64_t irg_n = 10'000;
  double irg_t = 0.8;
  auto* irg = app.add_subcommand("irg-sample", "Component volumes of the cluster-space random graph");
  add_common(irg, irg_c);
  irg->add_option("--n", irg_n, "Scale parameter");
  irg->add_option("--t", irg_t, "Time");
  irg->callback([&] {
    const auto s = sample_irg(irg_n, RateFunctions::bohman_frieze(), irg_t, irg_c.seed);
    emit_json(irg_c, {{"n", irg_n}, {"t", irg_t}, {"clusters", s.cluster_count}, {"volumes", s.volumes}});
  });

  // window
  Common win_c;
  WindowConfig win_cfg;
  auto* win = app.add_subcommand("window", "Rescaled largest components against the excursion limit");
  add_common(win, win_c);
  win->add_option("--n", win_cfg.n_list, "Sizes (comma separated)")->delimiter(',');
  win->add_option("--lambda", win_cfg.lambda_list, "Window positions (comma separated)")->delimiter(',');
  win->add_option("--reps", win_cfg.reps, "Replicas per side per batch");
  win->add_option("--batches", win_cfg.batches, "Independent KS batches per cell");
  win->add_option("--step", win_cfg.step, "Excursion grid step");
  win->callback([&] {
    win_cfg.seed = win_c.seed;
    win_cfg.budget_seconds = win_c.budget_seconds;
    emit_report(win_c, exp_critical_window(win_cfg));
  });

  // prop-main
  Common pm_c;
  PropMainConfig pm_cfg;
  auto* pm = app.add_subcommand("prop-main", "Moments at t_c - n^-gamma");
  add_common(pm, pm_c);
  pm->add_option("--n", pm_cfg.n_list, "Sizes (comma separated)")->delimiter(',');
  pm->add_option("--gamma", pm_cfg.gamma, "Exponent in (1/6, 1/5)");
  pm->add_option("--reps", pm_cfg.reps, "Replicas per size");
  pm->callback([&] {
    pm_cfg.seed = pm_c.seed;
    pm_cfg.budget_seconds = pm_c.budget_seconds;
    emit_report(pm_c, exp_prop_main(pm_cfg));
  });

  // subcritical-max
  Common sc_c;
  SubcriticalConfig sc_cfg;
  std::string sc_model = "bf";
  auto* sc = app.add_subcommand("subcritical-max", "Largest component bound below t_c");
  add_common(sc, sc_c);
  sc->add_option("--n", sc_cfg.n_list, "Sizes (comma separated)")->delimiter(',');
  sc->add_option("--gamma", sc_cfg.gamma, "Exponent in (0, 1/5)");
  sc->add_option("--reps", sc_cfg.reps, "Replicas per size");
  sc->add_option("--points", sc_cfg.grid_points, "Time grid points");
  sc->add_option("--model", sc_model, "Process")->check(CLI::IsMember({"bf", "er"}));
  sc->callback([&] {
    sc_cfg.seed = sc_c.seed;
    sc_cfg.budget_seconds = sc_c.budget_seconds;
    sc_cfg.model = sc_model == "er" ? Model::erdos_renyi : Model::bohman_frieze;
    emit_report(sc_c, exp_subcritical_max(sc_cfg));
  });

  // sandwich
  Common sw_c;
  SandwichConfig sw_cfg;
  double sw_delta = sw_cfg.delta;
  auto* sw = app.add_subcommand("sandwich", "RGIVA bounds around the non-singleton BF components");
  add_common(sw, sw_c);
  sw->add_option("--n", sw_cfg.n, "Number of vertices");
  sw->add_option("--delta", sw_delta, "Rate shift in [0, 0.2)");
  sw->add_option("--t", sw_cfg.t, "Time");
  sw->add_option("--reps", sw_cfg.reps, "Replicas per model");
  sw->callback([&] {
    sw_cfg.delta = sw_delta;
    sw_cfg.seed = sw_c.seed;
    sw_cfg.budget_seconds = sw_c.budget_seconds;
    emit_report(sw_c, exp_coupling_sandwich(sw_cfg));
  });

  // er-scaling
  Common er_c;
  ErScalingConfig er_cfg;
  auto* er = app.add_subcommand("er-scaling", "Largest ER component growth at t = 1");
  add_common(er, er_c);
  er->add_option("--n", er_cfg.n_list, "Sizes (comma separated)")->delimiter(',');
  er->add_option("--reps", er_cfg.reps, "Replicas per size");
  er->callback([&] {
    er_cfg.seed = er_c.seed;
    er_cfg.budget_seconds = er_c.budget_seconds;
    emit_report(er_c, exp_er_scaling(er_cfg));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
