#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "shrinkforge/diagnostics.hpp"
#include "shrinkforge/errors.hpp"

using namespace shrinkforge;

namespace {

OracleConfig small(int replicates = 8) {
    OracleConfig c;
    c.n_values = {60, 120};
    c.replicates = replicates;
    c.seed = 5;
    return c;
}

std::string csv(const OracleReport& r) {
    std::ostringstream out;
    write_oracle_csv(out, r);
    return out.str();
}

}  // namespace

TEST(OracleSchedule, RatesAndValidation) {
    OracleRateSchedule s;
    EXPECT_NO_THROW(s.validate());
    EXPECT_NEAR(s.a_n(16), std::pow(16.0, -0.75), 1e-15);
    EXPECT_NEAR(s.b_n(16), 0.5, 1e-15);
    const Eigen::VectorXd l = s.lambdas(100);
    ASSERT_EQ(l.size(), 10);
    for (Index j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(l(j), s.a_n(100));
    for (Index j = 5; j < 10; ++j) EXPECT_DOUBLE_EQ(l(j), s.b_n(100));
    // sqrt(n) a_n shrinks and sqrt(n) b_n grows.
    EXPECT_LT(std::sqrt(1e4) * s.a_n(10000), std::sqrt(1e2) * s.a_n(100));
    EXPECT_GT(std::sqrt(1e4) * s.b_n(10000), std::sqrt(1e2) * s.b_n(100));

    for (double g : {0.0, -0.1, 0.5}) {
        OracleRateSchedule bad;
        bad.g_exponent = g;
        EXPECT_THROW(bad.validate(), ConfigError) << g;
    }
    OracleRateSchedule bad;
    bad.h_exponent = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = OracleRateSchedule{};
    bad.p0 = 10;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(OracleSweep, ConfigChecks) {
    OracleConfig c = small();
    c.n_values = {10, 100};
    EXPECT_THROW(oracle_sweep(c), ConfigError);
    c.n_values = {200, 100};
    EXPECT_THROW(oracle_sweep(c), ConfigError);
    c = small();
    c.penalty = PenaltyKind::ridge;
    EXPECT_THROW(oracle_sweep(c), ConfigError);
    c = small();
    c.replicates = 0;
    EXPECT_THROW(oracle_sweep(c), ConfigError);
}

TEST(OracleSweep, RatesInRangeAndDeterministic) {
    for (PenaltyKind k : {PenaltyKind::scad, PenaltyKind::mcp, PenaltyKind::lasso}) {
        OracleConfig c = small();
        c.penalty = k;
        const OracleReport a = oracle_sweep(c);
        ASSERT_EQ(a.rows.size(), 2u);
        for (const auto& r : a.rows) {
            EXPECT_EQ(r.replicates, 8);
            EXPECT_GE(r.zero_recovery_rate, 0.0);
            EXPECT_LE(r.zero_recovery_rate, 1.0);
            EXPECT_GE(r.coverage, 0.0);
            EXPECT_LE(r.coverage, 1.0);
            EXPECT_EQ(r.penalty, to_string(k));
        }
        c.jobs = 2;
        EXPECT_EQ(csv(oracle_sweep(c)), csv(a));
    }
}

TEST(OracleSweep, FoldedConcaveRecoversTheZeros) {
    const OracleReport r = oracle_sweep(small(20));
    EXPECT_GE(r.rows.back().zero_recovery_rate, 0.9);
    EXPECT_GE(r.rows.back().coverage, 0.8);
}

TEST(OracleSweep, SlowTailRateHurtsRecovery) {
    OracleConfig c = small(20);
    const double good = oracle_sweep(c).rows.back().zero_recovery_rate;
    c.schedule.g_exponent = 0.01;
    const double slow = oracle_sweep(c).rows.back().zero_recovery_rate;
    EXPECT_LT(slow, good);
}

TEST(ShiftedOracle, NonePilotReproducesTheSweep) {
    const OracleConfig c = small();
    const ShiftedOracleReport s = shifted_oracle_sweep(c, PilotRule::none);
    EXPECT_EQ(csv(s.shifted), csv(oracle_sweep(c)));
    EXPECT_EQ(csv(s.baseline), csv(s.shifted));
}

TEST(ShiftedOracle, TruthPilotDoesNoWorse) {
    const OracleConfig c = small(20);
    const ShiftedOracleReport s = shifted_oracle_sweep(c, PilotRule::truth);
    for (std::size_t i = 0; i < s.shifted.rows.size(); ++i)
        EXPECT_GE(s.shifted.rows[i].zero_recovery_rate, s.baseline.rows[i].zero_recovery_rate);
    EXPECT_EQ(csv(s.baseline), csv(oracle_sweep(c)));
}

TEST(ShiftedOracle, OlsPilotCannotZeroAnything) {
    // Centering on the unpenalized minimizer leaves it optimal, so no
    // coordinate is set exactly to zero.
    const ShiftedOracleReport s = shifted_oracle_sweep(small(5), PilotRule::ols);
    for (const auto& r : s.shifted.rows) EXPECT_EQ(r.zero_recovery_rate, 0.0);
}

TEST(ShiftedOracle, Scad2PilotRecovers) {
    const ShiftedOracleReport s = shifted_oracle_sweep(small(10), PilotRule::scad2);
    EXPECT_GE(s.shifted.rows.back().zero_recovery_rate, 0.5);
}

TEST(PilotRule, Names) {
    for (auto r : {PilotRule::none, PilotRule::truth, PilotRule::ols, PilotRule::scad2})
        EXPECT_EQ(pilot_rule_from_string(to_string(r)), r);
    EXPECT_THROW(pilot_rule_from_string("oracle"), ConfigError);
}

TEST(OracleReport, InversionsAndCsv) {
    OracleReport r;
    r.rows = {OracleRow{100, "scad", 0.5, 0.9, 10}, OracleRow{200, "scad", 0.4, 0.95, 10},
              OracleRow{500, "scad", 0.9, 0.96, 10}};
    r.trend = "t";
    EXPECT_EQ(recovery_inversions(r), 1);
    EXPECT_EQ(csv(r),
              "# shrinkforge-v1\n"
              "# lambda_j uses the true support: a_n on nonzero coordinates, b_n on the rest\n"
              "n,penalty,zero_recovery_rate,coverage,replicates\n"
              "100,scad,0.5,0.9,10\n200,scad,0.4,0.95,10\n500,scad,0.9,0.96,10\n# trend: t\n");
}
