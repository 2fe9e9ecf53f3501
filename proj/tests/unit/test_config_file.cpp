#include <gtest/gtest.h>

#include <random>

#include "mmvlab/config_file.hpp"
#include "random_configs.hpp"

namespace mmv {
namespace {

const std::string kConfigDir = MMVLAB_CONFIG_DIR;

void expect_same(const ModelConfig& a, const ModelConfig& b) {
    EXPECT_EQ(a.horizon, b.horizon);
    EXPECT_EQ(a.x0, b.x0);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(format_schedule(a.market.r), format_schedule(b.market.r));
    EXPECT_EQ(format_schedule(a.market.mu), format_schedule(b.market.mu));
    EXPECT_EQ(format_schedule(a.market.sigma), format_schedule(b.market.sigma));
    EXPECT_EQ(a.insurance.kappa, b.insurance.kappa);
    EXPECT_EQ(a.insurance.kappa_r, b.insurance.kappa_r);
    EXPECT_EQ(a.claims.intensity(), b.claims.intensity());
    EXPECT_EQ(a.claims.mu0(), b.claims.mu0());
    EXPECT_EQ(a.claims.sigma0_sq(), b.claims.sigma0_sq());
}

TEST(ConfigFile, CanonicalFileIsTheBaseline) {
    const ModelConfig cfg = load_config(kConfigDir + "/experiment-6-2.cfg");
    expect_same(cfg, baseline_config());
    EXPECT_TRUE(validate_config(cfg).empty());
}

TEST(ConfigFile, ShippedConfigsAreValid) {
    for (const char* name : {"no-investment.cfg", "piecewise-discrete.cfg"}) {
        SCOPED_TRACE(name);
        EXPECT_TRUE(validate_config(load_config(kConfigDir + "/" + name)).empty());
    }
}

TEST(ConfigFile, RoundTripsRandomConfigs) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        const ModelConfig cfg = testing::random_config(rng);
        const ModelConfig back = parse_config(format_config(cfg));
        expect_same(cfg, back);
        EXPECT_EQ(format_config(back), format_config(cfg));
    }
}

TEST(ConfigFile, PiecewiseSchedules) {
    const Schedule s = parse_schedule("0.09@0, 0.12@0.5 , 0.1@1.5");
    ASSERT_EQ(s.values().size(), 3u);
    EXPECT_EQ(s(0.7), 0.12);
    EXPECT_EQ(format_schedule(s), "0.09@0, 0.12@0.5, 0.1@1.5");
    EXPECT_THROW(parse_schedule("0.1@0, 0.2"), ConfigError);
    EXPECT_THROW(parse_schedule("0.1@0.5"), ConfigError);
    EXPECT_THROW(parse_schedule("abc"), ConfigError);
}

const char* kMinimal =
    "horizon = 1\nx0 = 1\ntheta = 1\nr = 0.05\nmu = 0.1\nsigma = 0.2\n"
    "kappa = 0.1\nkappa_r = 0.2\nlambda = 2\n";

TEST(ConfigFile, DiscreteLaw) {
    const auto cfg = parse_config(std::string(kMinimal) +
                                  "claim_law = discrete\nclaim_atoms = 1, 3\nclaim_weights = 0.5, 0.5\n");
    EXPECT_DOUBLE_EQ(cfg.claims.mu0(), 4.0);
    EXPECT_DOUBLE_EQ(cfg.claims.sigma0_sq(), 10.0);
}

TEST(ConfigFile, CommentsAndOptionalKeys) {
    const auto cfg = parse_config(std::string("# header\n") + kMinimal +
                                  "claim_law = exponential # inline\nclaim_rate = 4\ninvestment = false\ns0 = 3\n");
    EXPECT_FALSE(cfg.market.investment);
    EXPECT_EQ(cfg.s0, 3.0);
}

TEST(ConfigFile, Errors) {
    const std::string exp = "claim_law = exponential\nclaim_rate = 4\n";
    EXPECT_THROW(parse_config(std::string(kMinimal) + exp + "foo = 1\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + exp + "x0 = 2\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "claim_law = exponential\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "claim_law = pareto\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + exp + "garbage line\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + exp + "s0 = 1x\n"), ConfigError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + exp + "investment = maybe\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.cfg"), ConfigError);
}

}  // namespace
}  // namespace mmv
