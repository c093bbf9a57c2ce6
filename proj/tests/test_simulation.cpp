#include <gtest/gtest.h>

#include "fedavg_oracle.hpp"
#include "satfl/dataset.hpp"
#include "satfl/simulation.hpp"

using namespace satfl;

namespace {

TrainTest small_data() {
  SyntheticSpec spec;
  spec.train_samples = 800;
  spec.test_samples = 200;
  return make_synthetic(spec);
}

SimulationConfig small_config(Scheme scheme, double q, int planes = 1) {
  SimulationConfig c;
  c.constellation.planes = planes;
  c.scheme = scheme;
  c.q = q;
  return c;
}

}  // namespace

class FullBudget : public ::testing::TestWithParam<Scheme> {};

TEST_P(FullBudget, CollapsesToCentralisedFedAvg) {
  const auto data = small_data();
  FederatedSimulation sim(small_config(GetParam(), 1.0), data.train, data.test);
  DenseVector w(7850);
  for (int round = 0; round < 3; ++round) {
    w = oracle::fedavg_step(w, sim.shards(), sim.config().hp, round);
    sim.run_global_iteration();
    double worst = 0.0;
    for (std::size_t i = 0; i < w.dim(); ++i) worst = std::max(worst, std::abs(w[i] - sim.weights()[i]));
    EXPECT_LT(worst, 1e-9) << "round " << round;
  }
}

INSTANTIATE_TEST_SUITE_P(Schemes, FullBudget,
                         ::testing::Values(Scheme::DenseIA, Scheme::SIA, Scheme::CLSIA, Scheme::NoIslDirect));

TEST(Simulation, DeterministicForFixedSeed) {
  const auto data = small_data();
  FederatedSimulation a(small_config(Scheme::CLSIA, 0.01, 2), data.train, data.test);
  FederatedSimulation b(small_config(Scheme::CLSIA, 0.01, 2), data.train, data.test);
  for (int i = 0; i < 2; ++i) {
    const auto ma = a.run_global_iteration();
    const auto mb = b.run_global_iteration();
    EXPECT_EQ(ma.plane_bits, mb.plane_bits);
    EXPECT_DOUBLE_EQ(ma.end_s, mb.end_s);
    EXPECT_DOUBLE_EQ(ma.accuracy, mb.accuracy);
  }
  EXPECT_EQ(a.weights(), b.weights());
}

TEST(Simulation, ClockAdvancesAndBitsMatchScheme) {
  const auto data = small_data();
  FederatedSimulation sim(small_config(Scheme::CLSIA, 0.01, 2), data.train, data.test);
  EXPECT_EQ(sim.Q(), 79u);
  EXPECT_DOUBLE_EQ(sim.total_data(), 800.0);
  const auto m1 = sim.run_global_iteration();
  const auto m2 = sim.run_global_iteration();
  EXPECT_EQ(m1.iteration, 1);
  EXPECT_EQ(m2.iteration, 2);
  EXPECT_GT(m1.end_s, m1.start_s);
  EXPECT_DOUBLE_EQ(m2.start_s, m1.end_s);
  ASSERT_EQ(m1.plane_bits.size(), 2u);
  for (auto b : m1.plane_bits) EXPECT_EQ(b, 8u * 79u * 45u);
  EXPECT_EQ(m1.gs_bits, 2u * (251200u + 79u * 45u));
  EXPECT_EQ(m1.dist_bits, 2u * 7u * (251200u + 3u));
}

TEST(Simulation, DensePlaneBits) {
  const auto data = small_data();
  FederatedSimulation sim(small_config(Scheme::DenseIA, 0.01), data.train, data.test);
  const auto m = sim.run_global_iteration();
  EXPECT_EQ(m.plane_bits, (std::vector<std::uint64_t>{2009600u}));
}

TEST(Simulation, OverrideReplacesTraining) {
  const auto data = small_data();
  FederatedSimulation sim(small_config(Scheme::DenseIA, 1.0), data.train, data.test);
  sim.set_gradient_override([](int, const DenseVector& w) {
    DenseVector g(w.dim());
    g[0] = 1.0;
    return g;
  });
  sim.run_global_iteration();
  EXPECT_NEAR(sim.weights()[0], 1.0, 1e-12);
  EXPECT_EQ(sim.weights()[1], 0.0);
}

TEST(Simulation, BlockedRingIsRejected) {
  const auto data = small_data();
  auto cfg = small_config(Scheme::SIA, 0.01);
  cfg.constellation.sats_per_plane = 4;
  EXPECT_THROW(FederatedSimulation(cfg, data.train, data.test), ConfigurationError);
  cfg.scheme = Scheme::NoIslDirect;
  EXPECT_NO_THROW(FederatedSimulation(cfg, data.train, data.test));
}

TEST(Simulation, TrainingRngDiffersAcrossRoundsAndSatellites) {
  auto a = training_rng(1, 0, 0), b = training_rng(1, 0, 0), c = training_rng(1, 1, 0), d = training_rng(1, 0, 1);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}
