#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "bfgraph/coalescent.hpp"
#include "bfgraph/excursions.hpp"
#include "bfgraph/stats.hpp"

using namespace bfgraph;

TEST(OrderMass, SortsAndDropsZeros) {
  const auto m = order_mass(std::vector<double>{0.5, 0.0, 2.0, 1.0});
  EXPECT_EQ(m.masses(), (std::vector<double>{2.0, 1.0, 0.5}));
  EXPECT_DOUBLE_EQ(m.sum_of_squares(), 4 + 1 + 0.25);
  EXPECT_TRUE(order_mass(std::vector<double>{}).empty());
  EXPECT_THROW(order_mass(std::vector<double>{1.0, -0.1}), std::invalid_argument);
  EXPECT_THROW(order_mass(std::vector<double>{NAN}), std::invalid_argument);
}

TEST(Coalescent, TwoUnitMassesMergeOnce) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto run = run_coalescent(order_mass(std::vector<double>{1, 1}), 100.0, seed);
    ASSERT_EQ(run.masses.masses(), (std::vector<double>{2.0}));
    ASSERT_EQ(run.merge_times.size(), 1u);
  }
}

TEST(Coalescent, MassConservedAndSquaresGrow) {
  Engine rng = make_engine(1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<double> raw(1 + uniform_below(rng, 60));
    for (auto& v : raw) v = exponential(rng, 2.0);
    const auto x0 = order_mass(raw);
    double prev_sq = x0.sum_of_squares();
    for (double d : {0.1, 0.5, 1.0, 3.0}) {
      // Same seed: each run extends the previous one.
      const auto x = simulate_coalescent(x0, d, seed);
      ASSERT_NEAR(x.total(), x0.total(), 1e-12 * x0.total());
      ASSERT_TRUE(std::is_sorted(x.masses().rbegin(), x.masses().rend()));
      ASSERT_GE(x.sum_of_squares(), prev_sq * (1 - 1e-14));
      prev_sq = x.sum_of_squares();
    }
  }
}

TEST(Coalescent, MergeTimeIsExponentialInProduct) {
  const auto x0 = order_mass(std::vector<double>{2, 3});
  std::vector<double> times;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed)
    times.push_back(run_coalescent(x0, 1e9, replica_seed(2, seed)).merge_times.front());
  EXPECT_NEAR(stats::mean(times), 1.0 / 6, 3 * stats::std_err(times));
}

TEST(Coalescent, PairSelectionProportionalToProduct) {
  // Masses 1, 2, 4: the first merge joins {2, 4} with probability 8/14.
  const auto x0 = order_mass(std::vector<double>{1, 2, 4});
  int hits = 0;
  const int runs = 20'000;
  for (int r = 0; r < runs; ++r) {
    const auto run = run_coalescent(x0, 1e9, replica_seed(3, r));
    // Stopping at the first merge time reveals which pair merged.
    const auto one = run_coalescent(x0, run.merge_times.front(), replica_seed(3, r));
    if (one.masses.masses() == std::vector<double>{6, 1}) ++hits;
  }
  const double p = 8.0 / 14;
  EXPECT_NEAR(static_cast<double>(hits) / runs, p, 3 * std::sqrt(p * (1 - p) / runs));
}

TEST(Excursions, DeterministicParabola) {
  const double step = 1.0 / 1024;
  for (double lambda : {0.5, 1.0, 3.0}) {
    std::vector<double> path;
    for (int k = 0; k * step <= 10.0; ++k) {
      const double t = k * step;
      path.push_back(lambda * t - t * t / 2);
    }
    const auto lengths = reflected_excursions(path, step);
    ASSERT_EQ(lengths.size(), 1u);
    EXPECT_DOUBLE_EQ(lengths.front(), 2 * lambda);
  }
}

TEST(Excursions, SetInvariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto e = sample_excursions(0.5, 1e-3, seed);
    ASSERT_TRUE(std::is_sorted(e.lengths.rbegin(), e.lengths.rend()));
    for (double l : e.lengths) ASSERT_GE(l, e.step * (1 - 1e-12));
    const double total = std::accumulate(e.lengths.begin(), e.lengths.end(), 0.0);
    ASSERT_LE(total, e.horizon + 1e-9);
    // Each excursion adds at most one grid cell beyond its positive points.
    ASSERT_GE(total, e.occupation - 1e-9);
    ASSERT_LE(total - e.occupation, e.step * static_cast<double>(e.lengths.size()) + 1e-9);
  }
}

TEST(Excursions, ErrorPaths) {
  EXPECT_THROW(sample_excursions(0.0, 10.0, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(sample_excursions(0.0, 5.0, 1e-3, 1), std::invalid_argument);
  EXPECT_EQ(default_excursion_horizon(-3.0), 10.0);
  EXPECT_EQ(default_excursion_horizon(4.0), 18.0);
}

TEST(Excursions, StronglyNegativeDriftGivesShortExcursions) {
  int short_runs = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    short_runs += sample_excursions(-10.0, 1e-4, replica_seed(4, seed)).largest() < 0.2;
  EXPECT_GE(short_runs, 950);
}

TEST(Excursions, MeshRefinementIsCauchyConsistent) {
  // Coupled paths: the coarse grids subsample one fine Brownian path.
  const double fine = 2.5e-4;
  const double horizon = 10.0;
  const auto points = static_cast<std::size_t>(horizon / fine);
  std::vector<double> means(3, 0.0);
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    Engine rng = make_engine(replica_seed(5, r));
    std::vector<double> w(points + 1, 0.0);
    for (std::size_t k = 1; k <= points; ++k) w[k] = w[k - 1] + std::sqrt(fine) * standard_normal(rng);
    for (int level = 0; level < 3; ++level) {
      const std::size_t stride = std::size_t{1} << (2 - level);
      const double step = fine * static_cast<double>(stride);
      std::vector<double> path;
      for (std::size_t k = 0; k <= points; k += stride) {
        const double t = static_cast<double>(k) * fine;
        path.push_back(w[k] - t * t / 2);
      }
      const auto lengths = reflected_excursions(path, step);
      means[level] += (lengths.empty() ? 0.0 : lengths.front()) / reps;
    }
  }
  EXPECT_LT(std::abs(means[2] - means[1]), std::abs(means[1] - means[0]));
}

TEST(Excursions, CoalescentBridgeMatchesDirectSampling) {
  const double step = 1e-3, lambda = 0.5;
  std::vector<double> evolved, direct;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto start = sample_excursions(0.0, step, replica_seed(6, r));
    evolved.push_back(simulate_coalescent(order_mass(start.lengths), lambda, replica_seed(7, r)).largest());
    direct.push_back(sample_excursions(lambda, step, replica_seed(8, r)).largest());
  }
  const auto ks = stats::ks_two_sample(evolved, direct);
  EXPECT_GT(ks.p_value, 0.01) << "KS distance " << ks.statistic;
}
