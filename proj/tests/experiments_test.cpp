#include <gtest/gtest.h>

#include <sstream>
#include <stdexcept>

#include "bfgraph/experiments.hpp"

using namespace bfgraph;

TEST(ParallelMap, ResultsInIndexOrder) {
  const auto out = parallel_map(100, [](std::size_t i) { return i * i; }, 4);
  for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i], i * i);
}

TEST(ParallelMap, RethrowsWorkerException) {
  EXPECT_THROW(parallel_map(
                   10, [](std::size_t i) -> int { if (i == 7) throw std::logic_error("boom"); return 0; }, 3),
               std::logic_error);
}

TEST(Report, JsonSchemaAndCsvRows) {
  ExperimentReport rep;
  rep.name = "demo";
  rep.params = {{"n", 10}};
  rep.cells = {{{"n", 1}, {"value", 0.5}, {"list", {1, 2}}}, {{"n", 2}, {"value", 0.25}}};
  rep.checks.push_back(Check::within("value_small", 0.5, 0.0, 1.0, ""));
  const auto j = rep.to_json();
  for (const char* key : {"name", "params", "cells", "pass"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("checks")[0].at("upper").get<double>(), 1.0);
  std::ostringstream os;
  rep.write_csv(os);
  EXPECT_EQ(os.str(), "n,value\n1,0.5\n2,0.25\n");
  rep.checks.push_back(Check::within("fails", 2.0, 0.0, 1.0, ""));
  EXPECT_FALSE(rep.pass());
}

TEST(Report, ChecksDerivableFromStoredNumbers) {
  PropMainConfig cfg;
  cfg.n_list = {2'000, 8'000};
  cfg.reps = 5;
  const auto j = exp_prop_main(cfg).to_json();
  for (const auto& c : j.at("checks")) {
    const double v = c.at("value").get<double>();
    const double lo = c.at("lower").is_null() ? -INFINITY : c.at("lower").get<double>();
    const double hi = c.at("upper").is_null() ? INFINITY : c.at("upper").get<double>();
    EXPECT_EQ(c.at("pass").get<bool>(), v >= lo && v <= hi) << c.at("name");
  }
  for (const auto& cell : j.at("cells")) EXPECT_TRUE(cell.contains("seed_base"));
}

TEST(Window, ReproducibleFromParametersAndSeed) {
  WindowConfig cfg;
  cfg.n_list = {1'000, 4'000};
  cfg.lambda_list = {-4.0, 0.0, 1.0};
  cfg.reps = 20;
  cfg.batches = 2;
  cfg.step = 2e-3;
  const auto a = exp_critical_window(cfg).to_json();
  const auto b = exp_critical_window(cfg).to_json();
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.at("cells").size(), 6u);
  const auto& rep = exp_critical_window(cfg);
  EXPECT_TRUE(rep.check("median_ordering").pass);
}

TEST(Window, RejectsTimesPastHorizon) {
  WindowConfig cfg;
  cfg.n_list = {1'000};
  cfg.lambda_list = {100.0};
  EXPECT_THROW(exp_critical_window(cfg), std::invalid_argument);
}

TEST(Budget, RefusesOversizedConfiguration) {
  PropMainConfig cfg;
  cfg.n_list = {1'000'000};
  cfg.reps = 500;
  cfg.budget_seconds = 1.0;
  EXPECT_THROW(exp_prop_main(cfg), BudgetExceeded);
  EXPECT_GT(CostModel{}.two_choice(1'000'000, 1.0), 0.0);
}

TEST(PropMain, GammaMustLieInWindow) {
  PropMainConfig cfg;
  cfg.gamma = 0.25;
  EXPECT_THROW(exp_prop_main(cfg), std::invalid_argument);
  cfg.gamma = 0.15;
  EXPECT_THROW(exp_prop_main(cfg), std::invalid_argument);
}

TEST(PropMain, PowerMeanBoundHolds) {
  PropMainConfig cfg;
  cfg.n_list = {5'000};
  cfg.reps = 10;
  EXPECT_TRUE(exp_prop_main(cfg).check("power_mean_bound").pass);
}

TEST(SubcriticalMax, ErModelBoundedAndTinyAtHalf) {
  SubcriticalConfig cfg;
  cfg.n_list = {10'000, 100'000};
  cfg.reps = 5;
  cfg.model = Model::erdos_renyi;
  const auto rep = exp_subcritical_max(cfg);
  EXPECT_NEAR(rep.params.at("t_c").get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(rep.check("ratio_at_half").pass);
  EXPECT_TRUE(rep.check("sup_ratio_trend").pass);
  cfg.gamma = 0.3;
  EXPECT_THROW(exp_subcritical_max(cfg), std::invalid_argument);
}

TEST(RhoCurve, ZeroAtOriginAndMonotone) {
  RhoCurveConfig cfg;
  cfg.t_grid = {0.0, 0.5, 1.0, 1.5};
  cfg.m = 200;
  const auto rep = exp_rho_curve(cfg);
  EXPECT_TRUE(rep.check("rho_at_zero").pass);
  EXPECT_TRUE(rep.check("monotone").pass);
  cfg.t_grid = {0.0, 10.0};
  EXPECT_THROW(exp_rho_curve(cfg), std::invalid_argument);
}

TEST(Sandwich, OrderingAtModerateTime) {
  SandwichConfig cfg;
  cfg.n = 20'000;
  cfg.reps = 20;
  const auto rep = exp_coupling_sandwich(cfg);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
}

TEST(Sandwich, ZeroShiftBracketsWithinNoise) {
  SandwichConfig cfg;
  cfg.n = 20'000;
  cfg.reps = 20;
  cfg.delta = 0.0;
  EXPECT_TRUE(exp_coupling_sandwich(cfg).pass());
}

TEST(Sandwich, DeepSubcriticalComponentsAreTiny) {
  SandwichConfig cfg;
  // The expected count of components above 4 grows linearly in n, so the
  // 99% level is a small-n statement.
  cfg.n = 50;
  cfg.reps = 1'000;
  cfg.t = 0.2;
  const auto j = exp_coupling_sandwich(cfg).to_json();
  for (const auto& cell : j.at("cells")) EXPECT_GE(cell.at("frac_max_le_4").get<double>(), 0.99) << cell.at("model");
  cfg.delta = 0.3;
  EXPECT_THROW(exp_coupling_sandwich(cfg), std::invalid_argument);
}
