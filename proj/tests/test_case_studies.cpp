#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pipeunc/case_studies.hpp"

using namespace pipeunc;

namespace
{

// Textbook Agresti-Coull with the familiar 1.96 critical value.
std::pair<double, double> ac_196(double x, double n)
{
    const double z = 1.959963984540054;
    const double nt = n + z * z;
    const double pt = (x + z * z / 2.0) / nt;
    const double h = z * std::sqrt(pt * (1.0 - pt) / nt);
    return {std::max(0.0, pt - h), std::min(1.0, pt + h)};
}

} // namespace

TEST(NormalCriticalValue, KnownQuantiles)
{
    EXPECT_NEAR(normal_critical_value(0.95), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_critical_value(0.99), 2.5758293035489004, 1e-12);
    EXPECT_THROW(normal_critical_value(1.0), invalid_parameter);
}

TEST(AgrestiCoull, Examples)
{
    const auto acs = agresti_coull_interval(16, 22);
    EXPECT_NEAR(acs.lo, 0.5113, 0.02);
    EXPECT_NEAR(acs.hi, 0.8733, 0.02);
    EXPECT_NEAR(acs.point, 16.0 / 22.0, 1e-15);

    const auto dyna = agresti_coull_interval(1, 22);
    EXPECT_EQ(dyna.lo, 0.0);
    EXPECT_NEAR(dyna.hi, 0.2407, 0.02);

    EXPECT_EQ(agresti_coull_interval(0, 40).lo, 0.0);
    EXPECT_EQ(agresti_coull_interval(40, 40).hi, 1.0);
}

TEST(AgrestiCoull, MatchesHandComputation)
{
    for (auto [x, n] : {std::pair{16, 22}, std::pair{25, 68}, std::pair{3, 65}, std::pair{1, 31}}) {
        const auto ci = agresti_coull_interval(x, n);
        const auto [lo, hi] = ac_196(x, n);
        EXPECT_NEAR(ci.lo, lo, 1e-12);
        EXPECT_NEAR(ci.hi, hi, 1e-12);
    }
}

TEST(AgrestiCoull, BoundsOrderedAndClamped)
{
    for (int n = 1; n <= 60; ++n) {
        for (int x = 0; x <= n; ++x) {
            const auto ci = agresti_coull_interval(x, n, 0.9);
            ASSERT_LE(0.0, ci.lo);
            ASSERT_LE(ci.lo, ci.hi);
            ASSERT_LE(ci.hi, 1.0);
        }
    }
}

TEST(AgrestiCoull, RejectsBadCounts)
{
    EXPECT_THROW(agresti_coull_interval(5, 4), invalid_parameter);
    EXPECT_THROW(agresti_coull_interval(-1, 4), invalid_parameter);
    EXPECT_THROW(agresti_coull_interval(0, 0), invalid_parameter);
}

TEST(Wilson, NestedInsideAgrestiCoull)
{
    for (auto [x, n] : {std::pair{16, 22}, std::pair{3, 65}, std::pair{12, 33}}) {
        const auto w = wilson_interval(x, n);
        const auto ac = agresti_coull_interval(x, n);
        EXPECT_LE(ac.lo, w.lo + 1e-12);
        EXPECT_GE(ac.hi, w.hi - 1e-12);
    }
    // Same center for both methods.
    const auto w = wilson_interval(16, 22);
    const auto ac = agresti_coull_interval(16, 22);
    EXPECT_NEAR((w.lo + w.hi) / 2.0, (ac.lo + ac.hi) / 2.0, 1e-12);
}

TEST(RuleBasedCaseStudy, DefaultTable)
{
    const auto rows = rule_based_case_study(default_tool_records());
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0].name, "ACS");
    EXPECT_NEAR(rows[0].ci.point, 0.727, 5e-4);
    EXPECT_EQ(rows[3].name, "Kali-A");
    EXPECT_NEAR(rows[3].ci.point, 0.046, 5e-4);
    EXPECT_NEAR(rows[3].ci.lo, 0.0100, 0.02);
    EXPECT_NEAR(rows[3].ci.hi, 0.1349, 0.02);
    EXPECT_NEAR(rows[5].ci.lo, 0.0, 0.02);
    EXPECT_NEAR(rows[5].ci.hi, 0.1804, 0.02);
}

TEST(LoadToolRecords, ParsesAndValidates)
{
    std::istringstream ok("name,correct,generated\nA,1,2\n# c\nB,0,5\n");
    const auto t = load_tool_records(ok);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1].generated, 5);

    std::istringstream bad_int("name,correct,generated\nA,x,2\n");
    EXPECT_THROW(load_tool_records(bad_int), parse_error);
    std::istringstream bad_range("name,correct,generated\nA,3,2\n");
    EXPECT_THROW(load_tool_records(bad_range), validation_error);
    std::istringstream bad_header("tool,ok,total\n");
    EXPECT_THROW(load_tool_records(bad_header), parse_error);
    EXPECT_THROW(load_tool_records_file("/nonexistent/tools.csv"), io_error);
}

TEST(LoadToolRecords, ShippedFileMatchesDefaults)
{
    const auto t = load_tool_records_file(PIPEUNC_DATA_DIR "/tools.csv");
    const auto d = default_tool_records();
    ASSERT_EQ(t.size(), d.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(t[i].name, d[i].name);
        EXPECT_EQ(t[i].correct, d[i].correct);
        EXPECT_EQ(t[i].generated, d[i].generated);
    }
}

TEST(RoundedChain, DefaultCase)
{
    const auto c = rounded_chain(879, 0.86, 0.44);
    EXPECT_EQ(c.detected, 756);
    EXPECT_EQ(c.fixed, 333);
    EXPECT_EQ(c.residual, 423);
}

TEST(RoundedChain, ZeroRepairAccuracy)
{
    const auto c = rounded_chain(879, 0.86, 0.0);
    EXPECT_EQ(c.fixed, 0);
    EXPECT_EQ(c.residual, c.detected);
}

TEST(ComposedCase, DefaultReport)
{
    const auto r = composed_pipeline_case(879, 0.86, 0.44, default_recall_pbox);
    EXPECT_EQ(r.point, rounded_chain(879, 0.86, 0.44));
    EXPECT_NEAR(r.point_fix_rate, 0.3784, 1e-12);
    EXPECT_DOUBLE_EQ(r.max_fix_rate, 0.44);
    EXPECT_NEAR(r.extremes.fix_rate.lo, 0.03, 0.01);
    EXPECT_LE(r.extremes.fix_rate.hi, 0.44);
    EXPECT_FALSE(r.notes.empty());
}

TEST(ComposedCase, DegenerateBoxReproducesPointArithmetic)
{
    const auto r = composed_pipeline_case(879, 0.86, 0.44, PBoxParams{0.86, 0.86, 0.86});
    EXPECT_EQ(r.extremes.fix_rate.width(), 0.0);
    EXPECT_EQ(r.means.fix_rate.width(), 0.0);
    EXPECT_NEAR(r.extremes.fix_rate.lo, 0.3784, 1e-12);
    EXPECT_EQ(r.worst_chain, r.point);
    EXPECT_EQ(r.best_chain, r.point);
}

TEST(ComposedCase, RejectsBadInput)
{
    EXPECT_THROW(composed_pipeline_case(0, 0.86, 0.44, default_recall_pbox), invalid_parameter);
    EXPECT_THROW(composed_pipeline_case(879, 1.2, 0.44, default_recall_pbox), invalid_parameter);
    EXPECT_THROW(composed_pipeline_case(879, 0.86, 0.44, PBoxParams{0.9, 0.1, 0.5}), invalid_parameter);
}
