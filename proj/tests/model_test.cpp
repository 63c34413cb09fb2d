#include "judba/config_io.hpp"
#include "judba/model.hpp"

#include <random>
#include <sstream>

#include "gtest/gtest.h"

namespace judba {
namespace {

SystemConfig default_config() {
  SystemConfig c;
  c.bandwidth_hz = 10e6;
  c.idle_power_w = 0.1;
  c.noise_w = 7.9e-13;
  c.alpha = 0.5;
  return c;
}

TEST(ValidateConfig, DefaultsAreValid) {
  const auto c = default_config();
  EXPECT_EQ(validate_config(c), c);
  ScenarioSpec spec;
  EXPECT_DOUBLE_EQ(spec.tx_power_w, 0.3);
  EXPECT_DOUBLE_EQ(spec.sample_bits, 800e3);
}

TEST(ValidateConfig, AlphaOutOfRange) {
  auto c = default_config();
  c.alpha = 1.5;
  try {
    validate_config(c);
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_TRUE(e.mentions("alpha"));
    EXPECT_EQ(e.violations().size(), 1u);
  }
}

TEST(ValidateConfig, ZeroBandwidth) {
  auto c = default_config();
  c.bandwidth_hz = 0;
  try {
    validate_config(c);
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_TRUE(e.mentions("bandwidth_hz"));
  }
}

TEST(ValidateConfig, ListsEveryViolation) {
  auto c = default_config();
  c.alpha = -0.1;
  c.noise_w = 0;
  c.bisect_tol = 0.1;
  c.exhaustive_threshold = 0;
  try {
    validate_config(c);
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_TRUE(e.mentions("alpha"));
    EXPECT_TRUE(e.mentions("noise_w"));
    EXPECT_TRUE(e.mentions("bisect_tol"));
    EXPECT_TRUE(e.mentions("exhaustive_threshold"));
    EXPECT_EQ(e.violations().size(), 4u);
  }
}

TEST(CompressionProfile, BuiltinRows) {
  const auto p = CompressionProfile::builtin();
  EXPECT_EQ(lookup_compression(p, 32), (CompressionLookup{69, 34.31e3}));
  EXPECT_EQ(lookup_compression(p, 1), (CompressionLookup{83, 2798.25e3}));
  EXPECT_THROW(lookup_compression(p, 5), UnknownRatio);
}

TEST(CompressionProfile, ShippedTableShape) {
  const auto profile = CompressionProfile::builtin();
  const auto& rows = profile.rows();
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].lambda, rows[i - 1].lambda);
    EXPECT_LE(rows[i].accuracy_pct, rows[i - 1].accuracy_pct);
  }
}

TEST(CompressionProfile, RatioAt32AgainstBaseline) {
  const auto p = CompressionProfile::builtin();
  const double ratio = p.lookup(32).accuracy_pct / p.lookup(1).accuracy_pct;
  EXPECT_NEAR(ratio, 69.0 / 83.0, 1e-15);
  EXPECT_NEAR(ratio, 0.85, 0.02);
}

TEST(CompressionProfile, LookupIsPure) {
  const auto p = CompressionProfile::builtin();
  for (double l : {1.0, 4.0, 8.0, 16.0, 32.0, 64.0}) EXPECT_EQ(p.lookup(l), p.lookup(l));
}

TEST(CompressionProfile, RejectsNonIncreasingLambda) {
  EXPECT_THROW(CompressionProfile({{4, 70, 10}, {4, 60, 9}}), ConfigInvalid);
  EXPECT_THROW(CompressionProfile({{1, 0, 10}}), ConfigInvalid);
  EXPECT_THROW(CompressionProfile(std::vector<CompressionRow>{}), ConfigInvalid);
}

TEST(UploadDecision, Participants) {
  const auto d = UploadDecision::from_mask(0b1011, 5);
  EXPECT_EQ(d.rho, (std::vector<std::uint8_t>{1, 1, 0, 1, 0}));
  EXPECT_EQ(d.count(), 3u);
  EXPECT_EQ(d.participants(), (std::vector<std::size_t>{0, 1, 3}));
}

TEST(ConfigFile, ParsesKeysAndComments) {
  const auto rc = parse_config(
      "# comment\n"
      "bandwidth_hz = 2e7\n"
      "alpha=0.25\n"
      "\n"
      "num_devices = 7\n"
      "common_latent_size = false\n");
  EXPECT_DOUBLE_EQ(rc.system.bandwidth_hz, 2e7);
  EXPECT_DOUBLE_EQ(rc.system.alpha, 0.25);
  EXPECT_EQ(rc.scenario.num_devices, 7u);
  EXPECT_FALSE(rc.system.common_latent_size);
  EXPECT_EQ(rc.profile, CompressionProfile::builtin());
}

TEST(ConfigFile, ReportsEveryBadKey) {
  try {
    parse_config("alpha = 2\nbandwidth_hz = abc\nwhat = 1\n");
    FAIL() << "expected ConfigInvalid";
  } catch (const ConfigInvalid& e) {
    EXPECT_TRUE(e.mentions("bandwidth_hz"));
    EXPECT_TRUE(e.mentions("what"));
  }
  EXPECT_THROW(parse_config("alpha = 1.5\n"), ConfigInvalid);
  EXPECT_THROW(parse_config("alpha = 0.1\nalpha = 0.2\n"), ConfigInvalid);
  EXPECT_THROW(parse_config("compression_ratio = 5\n"), ConfigInvalid);
}

TEST(ConfigFile, InlineProfile) {
  const auto rc = parse_config("compression_profile = 1:90:1000, 2:80:500\ncompression_ratio = 2\n");
  EXPECT_EQ(rc.profile.lookup(2), (CompressionLookup{80, 500}));
  EXPECT_THROW(rc.profile.lookup(4), UnknownRatio);
}

TEST(ConfigFile, ProfileCsv) {
  std::istringstream in(
      "lambda,accuracy_pct,model_params\n"
      "1,83,2798250\n"
      "32,69,34310\n");
  const auto p = parse_profile_csv(in);
  EXPECT_EQ(p.lookup(32), (CompressionLookup{69, 34310}));

  std::istringstream bad_header("ratio,acc,params\n1,2,3\n");
  EXPECT_THROW(parse_profile_csv(bad_header), ConfigInvalid);
  std::istringstream bad_row("lambda,accuracy_pct,model_params\n1,x,3\n");
  EXPECT_THROW(parse_profile_csv(bad_row), ConfigInvalid);
}

TEST(ConfigFile, MissingFileIsConfigInvalid) {
  EXPECT_THROW(load_config("/nonexistent/judba.cfg"), ConfigInvalid);
}

// serialize -> parse -> validate reproduces any valid config field by field.
TEST(ConfigFile, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pos = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };
  for (int trial = 0; trial < 300; ++trial) {
    RunConfig c;
    c.system.bandwidth_hz = pos(1e5, 1e9);
    c.system.noise_w = pos(1e-15, 1e-9);
    c.system.idle_power_w = pos(1e-3, 1);
    c.system.alpha = unit(rng);
    c.system.cycles_per_image = pos(1e5, 1e9);
    c.system.kappa = pos(1e-29, 1e-25);
    c.system.edge_freq_hz = pos(1e8, 1e10);
    c.system.train_cycles_per_sample = pos(1e5, 1e9);
    c.system.finetune_cycles_per_sample = pos(1e5, 1e10);
    c.system.inference_cycles_per_sample = pos(1e5, 1e9);
    c.system.bs_tx_power_w = pos(0.1, 10);
    c.system.bits_per_parameter = 1 + static_cast<std::uint32_t>(rng() % 64);
    c.system.exhaustive_threshold = 1 + static_cast<std::uint32_t>(rng() % 20);
    c.system.bisect_tol = pos(1e-14, 1e-3);
    c.system.bisect_max_iter = 1 + static_cast<std::uint32_t>(rng() % 1000);
    c.system.common_latent_size = (rng() & 1) != 0;
    c.scenario.num_devices = 1 + rng() % 100;
    c.scenario.freq_range_hz = {pos(1e7, 1e9), 0};
    c.scenario.freq_range_hz.hi = c.scenario.freq_range_hz.lo * (1 + unit(rng));
    c.scenario.pathloss.exponent = pos(1, 5);
    c.scenario.tx_power_w = pos(0.01, 2);
    std::vector<CompressionRow> rows;
    double lambda = 1;
    double acc = 99;
    for (int k = 0; k < 4; ++k) {
      rows.push_back({lambda, acc, pos(1e3, 1e7), unit(rng), pos(1, 1e5)});
      lambda *= 1 + pos(0.1, 3);
      acc *= unit(rng) * 0.5 + 0.5;
    }
    c.profile = CompressionProfile(rows);
    c.system.compression_ratio = rows[rng() % rows.size()].lambda;

    const auto text = serialize(c);
    const auto back = parse_config(text);
    ASSERT_EQ(back, c) << text;
    EXPECT_EQ(validate_config(back.system), c.system);
  }
}

}  // namespace
}  // namespace judba
