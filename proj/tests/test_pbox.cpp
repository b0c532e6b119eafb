#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "pipeunc/pbox.hpp"

using namespace pipeunc;

namespace
{

const PBoxParams kBox = default_recall_pbox;

// Composite Simpson on [lo, hi] with n (even) panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n)
{
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) {
        s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    }
    return s * h / 3.0;
}

// Expected value of an inverse CDF under p ~ U(0, 1), integrating each
// smooth branch separately so the kink at t does not hurt accuracy. The
// set-valued endpoints have measure zero.
double quadrature_mean(const PBoxParams& b, bool lower)
{
    const double t = (b.max_b - b.mean_mu) / (b.max_b - b.min_a);
    if (lower) {
        auto f = [&](double p) { return (p * b.min_a - b.mean_mu) / (p - 1.0); };
        return simpson(f, 0.0, t, 20000) + b.max_b * (1.0 - t);
    }
    auto g = [&](double p) { return b.max_b - (b.max_b - b.mean_mu) / p; };
    return b.min_a * t + simpson(g, t, 1.0, 20000);
}

struct Moments {
    double mean;
    double sd;
};

Moments moments(const std::vector<double>& xs)
{
    double m = 0.0;
    for (double x : xs) {
        m += x;
    }
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) {
        v += (x - m) * (x - m);
    }
    return {m, std::sqrt(v / static_cast<double>(xs.size() - 1))};
}

} // namespace

TEST(PBoxParams, Threshold)
{
    EXPECT_NEAR(kBox.threshold(), 0.26 / 0.93, 1e-15);
    EXPECT_FALSE(kBox.degenerate());
    EXPECT_TRUE((PBoxParams{0.74, 0.74, 0.74}).degenerate());
}

TEST(PBoxParams, Validation)
{
    EXPECT_NO_THROW(validate(kBox));
    EXPECT_NO_THROW(validate(PBoxParams{0.74, 0.74, 0.74}));
    EXPECT_THROW(validate(PBoxParams{0.5, 0.4, 0.45}), invalid_parameter);
    EXPECT_THROW(validate(PBoxParams{0.1, 0.9, 0.95}), invalid_parameter);
    EXPECT_THROW(validate(PBoxParams{-0.1, 0.9, 0.5}), invalid_parameter);
}

TEST(InverseLower, Examples)
{
    Rng rng(1);
    EXPECT_EQ(inverse_lower(kBox, 0.5, rng), 1.0);
    EXPECT_NEAR(inverse_lower(kBox, 0.1, rng), 0.8144444444444444, 1e-12);
    for (int i = 0; i < 1000; ++i) {
        const double v = inverse_lower(kBox, 0.0, rng);
        ASSERT_GE(v, 0.07);
        ASSERT_LE(v, 0.74);
    }
    EXPECT_THROW(inverse_lower(kBox, 1.5, rng), invalid_parameter);
}

TEST(InverseUpper, Examples)
{
    Rng rng(2);
    EXPECT_EQ(inverse_upper(kBox, 0.1, rng), 0.07);
    EXPECT_NEAR(inverse_upper(kBox, 0.5, rng), 0.48, 1e-12);
    for (int i = 0; i < 1000; ++i) {
        const double v = inverse_upper(kBox, 1.0, rng);
        ASSERT_GE(v, 0.74);
        ASSERT_LE(v, 1.0);
    }
    EXPECT_THROW(inverse_upper(kBox, -0.1, rng), invalid_parameter);
}

TEST(Inverses, DegenerateBoxIsConstant)
{
    const PBoxParams box{0.3, 0.3, 0.3};
    Rng rng(3);
    for (double p : {0.0, 0.2, 0.7, 1.0}) {
        EXPECT_EQ(inverse_lower(box, p, rng), 0.3);
        EXPECT_EQ(inverse_upper(box, p, rng), 0.3);
    }
}

TEST(Inverses, RandomBoxesKeepOrderRangeAndMonotonicity)
{
    Rng gen(99);
    Rng endpoint(100);
    for (int k = 0; k < 500; ++k) {
        double a = gen.uniform01();
        double b = gen.uniform01();
        if (a > b) {
            std::swap(a, b);
        }
        const PBoxParams box{a, b, gen.uniform(a, b)};
        double prev_lo = -1.0;
        double prev_up = -1.0;
        for (int i = 1; i < 200; ++i) {
            const double p = i / 200.0;
            const double lo = inverse_lower(box, p, endpoint);
            const double up = inverse_upper(box, p, endpoint);
            ASSERT_LE(up, lo);
            ASSERT_GE(up, a);
            ASSERT_LE(lo, b);
            ASSERT_GE(lo, prev_lo);
            ASSERT_GE(up, prev_up);
            prev_lo = lo;
            prev_up = up;
        }
    }
}

TEST(ExpectedRecall, ClosedFormMatchesQuadrature)
{
    EXPECT_NEAR(expected_optimistic_recall(kBox), quadrature_mean(kBox, true), 1e-10);
    EXPECT_NEAR(expected_pessimistic_recall(kBox), quadrature_mean(kBox, false), 1e-10);
    // Frozen from the quadrature oracle above.
    EXPECT_NEAR(quadrature_mean(kBox, true), 0.959697605, 1e-8);
    EXPECT_NEAR(quadrature_mean(kBox, false), 0.408629232, 1e-8);

    for (const PBoxParams& box : {PBoxParams{0.2, 0.9, 0.4}, PBoxParams{0.0, 1.0, 0.5}, PBoxParams{0.6, 0.65, 0.64}}) {
        EXPECT_NEAR(expected_optimistic_recall(box), quadrature_mean(box, true), 1e-9);
        EXPECT_NEAR(expected_pessimistic_recall(box), quadrature_mean(box, false), 1e-9);
    }
}

TEST(ExpectedRecall, EdgeBoxes)
{
    EXPECT_EQ(expected_optimistic_recall(PBoxParams{0.2, 0.8, 0.2}), 0.2);
    EXPECT_EQ(expected_pessimistic_recall(PBoxParams{0.2, 0.8, 0.8}), 0.8);
    EXPECT_EQ(expected_optimistic_recall(PBoxParams{0.5, 0.5, 0.5}), 0.5);
}

TEST(SampleRecallStreams, StreamMeansWithinThreeSigma)
{
    const auto s = sample_recall_streams(kBox, 100000, 2024);
    ASSERT_EQ(s.size(), 100000u);
    const auto opt = moments(s.optimistic);
    const auto pes = moments(s.pessimistic);
    EXPECT_NEAR(opt.mean, quadrature_mean(kBox, true), 3.0 * opt.sd / std::sqrt(1e5));
    EXPECT_NEAR(pes.mean, quadrature_mean(kBox, false), 3.0 * pes.sd / std::sqrt(1e5));
}

TEST(SampleRecallStreams, PairedAndOrdered)
{
    const auto s = sample_recall_streams(kBox, 5000, 1);
    ASSERT_EQ(s.optimistic.size(), s.p_values.size());
    ASSERT_EQ(s.pessimistic.size(), s.p_values.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_LE(s.pessimistic[i], s.optimistic[i]);
    }
}

TEST(SampleRecallStreams, DegenerateBox)
{
    const auto s = sample_recall_streams(PBoxParams{0.74, 0.74, 0.74}, 5, 77);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(s.optimistic[i], 0.74);
        EXPECT_EQ(s.pessimistic[i], 0.74);
    }
}

TEST(SampleRecallStreams, Deterministic)
{
    const auto a = sample_recall_streams(PBoxParams{0.1, 0.9, 0.3}, 3, 5);
    const auto b = sample_recall_streams(PBoxParams{0.1, 0.9, 0.3}, 3, 5);
    EXPECT_EQ(a.p_values, b.p_values);
    EXPECT_EQ(a.optimistic, b.optimistic);
    EXPECT_EQ(a.pessimistic, b.pessimistic);
    EXPECT_THROW(sample_recall_streams(kBox, 0, 5), invalid_parameter);
}

TEST(PropagateInterval, FnRatioCollapsesAtFullFixRate)
{
    const auto s = sample_recall_streams(kBox, 2000, 42);
    const auto iv = propagate_interval({10000, 0.5}, {1.0, 0.0}, s, IntervalMode::extremes);
    EXPECT_EQ(iv.fn_ratio, (Interval{1.0, 1.0}));
}

TEST(PropagateInterval, FixRateExtremesAtHalfFixRate)
{
    const auto s = sample_recall_streams(kBox, 2000, 42);
    const auto iv = propagate_interval({10000, 0.5}, {0.5, 0.0}, s, IntervalMode::extremes);
    EXPECT_NEAR(iv.fix_rate.lo, 0.035, 0.02);
    EXPECT_NEAR(iv.fix_rate.hi, 0.50, 0.02);
}

TEST(PropagateInterval, DegenerateBoxGivesAnalyticPoint)
{
    const auto s = sample_recall_streams(PBoxParams{0.74, 0.74, 0.74}, 50, 3);
    for (auto mode : {IntervalMode::extremes, IntervalMode::means}) {
        const auto iv = propagate_interval({10000, 0.5}, {0.5, 0.0}, s, mode);
        EXPECT_NEAR(iv.prevalence.lo, 0.315, 1e-12);
        EXPECT_NEAR(iv.prevalence.hi, 0.315, 1e-12);
        EXPECT_EQ(iv.mode, mode);
    }
}

TEST(PropagateInterval, MeansNestedInsideExtremes)
{
    const auto s = sample_recall_streams(kBox, 3000, 8);
    const auto ex = propagate_interval({10000, 0.3}, {0.7, 0.0}, s, IntervalMode::extremes);
    const auto me = propagate_interval({10000, 0.3}, {0.7, 0.0}, s, IntervalMode::means);
    for (auto [e, m] : {std::pair{ex.prevalence, me.prevalence}, std::pair{ex.fix_rate, me.fix_rate},
                        std::pair{ex.fn_ratio, me.fn_ratio}}) {
        EXPECT_LE(e.lo, m.lo);
        EXPECT_LE(m.hi, e.hi);
        EXPECT_LE(m.lo, m.hi);
    }
}
