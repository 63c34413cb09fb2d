#include "judba/oracle.hpp"

#include <random>

#include "gtest/gtest.h"
#include "judba/solver.hpp"
#include "test_support.hpp"

namespace judba {
namespace {

using testing::rel_diff;

TEST(GridOracle, SingleParticipant) {
  SystemConfig c;
  const auto ds = testing::random_devices(3, 21);
  const auto d = UploadDecision::from_mask(0b010, 3);
  const auto g = oracle::grid_bandwidth_oracle(ds, d, c, 1e-3);
  EXPECT_EQ(g.best_w, (std::vector<double>{0.0, 1.0, 0.0}));
  const double closed = local_compute_latency(ds[1], c) + latent_vector_sizes(ds, c)[1] / full_band_rate(ds[1], c);
  EXPECT_LE(rel_diff(g.best_t, closed), 1e-12);
}

TEST(GridOracle, IdenticalPairSplitsEvenly) {
  SystemConfig c;
  auto ds = testing::random_devices(1, 4);
  ds.push_back(ds[0]);
  const auto g = oracle::grid_bandwidth_oracle(ds, UploadDecision::all(2, true), c, 1e-3);
  EXPECT_NEAR(g.best_w[0], 0.5, 1e-3 + 1e-12);
  EXPECT_NEAR(g.best_w[1], 0.5, 1e-3 + 1e-12);
}

TEST(GridOracle, SandwichesSolverOnThreeDevices) {
  SystemConfig c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::random_devices(3, 100 + seed);
    const auto d = UploadDecision::all(3, true);
    const auto bw = solve_bandwidth(ds, d, c);
    const auto g = oracle::grid_bandwidth_oracle(ds, d, c, 1e-3);
    const double slack = oracle::grid_slack(ds, d, bw.allocation.w, bw.report.t_star, c, 1e-3);
    EXPECT_TRUE(std::isfinite(slack));
    EXPECT_LE(bw.report.t_star, g.best_t + c.bisect_tol * bw.report.t_star);
    EXPECT_LE(g.best_t, bw.report.t_star + slack);
    double sum = 0.0;
    for (double w : g.best_w) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(GridOracle, Preconditions) {
  SystemConfig c;
  const auto ds = testing::random_devices(4, 1);
  EXPECT_THROW(oracle::grid_bandwidth_oracle(ds, UploadDecision::all(4, true), c, 1e-3), TooManyParticipants);
  const auto d = UploadDecision::from_mask(0b0111, 4);
  EXPECT_THROW(oracle::grid_bandwidth_oracle(ds, d, c, 0.5), std::invalid_argument);
  EXPECT_THROW(oracle::grid_bandwidth_oracle(ds, d, c, 1e-5), std::invalid_argument);
  EXPECT_NO_THROW(oracle::grid_bandwidth_oracle(ds, d, c, 1e-2));
}

TEST(ReferenceAllocation, AgreesWithBisection) {
  SystemConfig c;
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto ds = testing::random_devices(1 + rng() % 15, 8000 + trial);
    const auto d = testing::random_decision(ds.size(), rng, true);
    const auto bw = solve_bandwidth(ds, d, c);
    const auto [w, t] = oracle::reference_allocation(ds, d, c);
    EXPECT_LE(rel_diff(t, bw.report.t_star), 1e-8);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_NEAR(w[i], bw.allocation.w[i], 1e-7);
  }
}

TEST(BruteForceCost, MatchesSystemCost) {
  const auto profile = CompressionProfile::builtin();
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    SystemConfig c;
    c.alpha = double(rng() % 1001) / 1000.0;
    c.common_latent_size = (trial % 5) != 0;
    c.compression_ratio = profile.rows()[rng() % profile.rows().size()].lambda;
    const auto ds = testing::random_devices(1 + rng() % 30, 9000 + trial);
    const auto d = testing::random_decision(ds.size(), rng);
    const auto s = evaluate_decision(ds, d, c, profile);
    EXPECT_LE(rel_diff(oracle::brute_force_cost(ds, d, s.allocation.w, c, profile), s.system_cost), 1e-9);
  }
}

TEST(BruteForceCost, LatencyOnlyIsMTimesT) {
  const auto profile = CompressionProfile::builtin();
  SystemConfig c;
  c.alpha = 0.0;
  const auto ds = testing::random_devices(7, 5);
  const auto d = UploadDecision::from_mask(0b1010011, 7);
  const auto bw = solve_bandwidth(ds, d, c);
  const double t = completion_latency(ds, d, bw.allocation, c);
  EXPECT_LE(rel_diff(oracle::brute_force_cost(ds, d, bw.allocation.w, c, profile), 7 * t), 1e-12);
}

TEST(BruteForceCost, NoUploadsCostsLocalEnergyOnly) {
  const auto profile = CompressionProfile::builtin();
  SystemConfig c;
  const auto ds = testing::random_devices(6, 8);
  const auto d = UploadDecision::all(6, false);
  const std::vector<double> zero(6, 0.0);
  double expected = 0.0;
  const double params = profile.lookup(c.compression_ratio).model_params;
  for (const auto& dev : ds) {
    const auto e = energy_breakdown(dev, false, 0.0, 0.0, ScenarioTotals{0.0, params}, c);
    expected += c.alpha * e.total_j;
  }
  EXPECT_LE(rel_diff(oracle::brute_force_cost(ds, d, zero, c, profile), expected), 1e-12);
  EXPECT_LE(rel_diff(oracle::brute_force_cost(ds, d, c, profile), expected), 1e-12);
}

TEST(BruteForceCost, Errors) {
  const auto profile = CompressionProfile::builtin();
  SystemConfig c;
  const auto ds = testing::random_devices(2, 8);
  EXPECT_THROW(oracle::brute_force_cost(ds, UploadDecision::all(2, true), std::vector<double>{1.0, 0.0}, c, profile),
               ZeroBandwidth);
  c.compression_ratio = 5;
  EXPECT_THROW(oracle::brute_force_cost(ds, UploadDecision::all(2, false), std::vector<double>{0.0, 0.0}, c, profile),
               UnknownRatio);
}

}  // namespace
}  // namespace judba
