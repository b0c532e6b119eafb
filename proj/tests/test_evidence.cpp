#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pipeunc/evidence.hpp"

using namespace pipeunc;

namespace
{

std::vector<EvidenceSample> parse(const std::string& text)
{
    std::istringstream in(text);
    return load_samples(in);
}

std::vector<EvidenceSample> recalls(const std::vector<double>& values)
{
    std::vector<EvidenceSample> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.push_back({"s" + std::to_string(i), Metric::recall, values[i]});
    }
    return out;
}

} // namespace

TEST(LoadSamples, HeaderOnly)
{
    EXPECT_TRUE(parse("source_id,metric,value\n").empty());
}

TEST(LoadSamples, SingleRow)
{
    const auto s = parse("source_id,metric,value\np1,recall,0.74\n");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], (EvidenceSample{"p1", Metric::recall, 0.74}));
}

TEST(LoadSamples, CommentsBlankLinesAndWhitespace)
{
    const auto s = parse("# corpus\n\nsource_id,metric,value\r\n p1 , precision , 0.5 \n# trailing\n");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].metric, Metric::precision);
    EXPECT_EQ(s[0].value, 0.5);
}

TEST(LoadSamples, OutOfRangeValueIsValidationError)
{
    try {
        parse("source_id,metric,value\np1,recall,0.2\np1,recall,1.5\n");
        FAIL() << "expected validation_error";
    } catch (const validation_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(LoadSamples, MalformedRowsCarryLineNumbers)
{
    const std::vector<std::pair<std::string, std::size_t>> cases{
        {"source_id,metric,value\np1,recall\n", 2},
        {"source_id,metric,value\np1,f1,0.3\n", 2},
        {"source_id,metric,value\n\np1,recall,abc\n", 3},
        {"source_id,metric,value\n,recall,0.3\n", 2},
        {"source_id,metric,value\np1,recall,nan\n", 2},
        {"id,metric,value\n", 1},
        {"", 1},
    };
    for (const auto& [text, line] : cases) {
        try {
            parse(text);
            FAIL() << "expected parse_error for: " << text;
        } catch (const validation_error&) {
            FAIL() << "expected a plain parse_error for: " << text;
        } catch (const parse_error& e) {
            EXPECT_EQ(e.line(), line) << text;
        }
    }
}

TEST(LoadSamplesFile, MissingFileIsIoError)
{
    EXPECT_THROW(load_samples_file("/nonexistent/evidence.csv"), io_error);
}

TEST(WriteSamples, RoundTrip)
{
    const std::vector<EvidenceSample> in{{"a", Metric::recall, 0.1 + 0.2}, {"b", Metric::precision, 1.0 / 3.0}};
    std::ostringstream out;
    write_samples(out, in);
    EXPECT_EQ(parse(out.str()), in);
}

TEST(RemoveOutliers, NonePolicyKeepsEverything)
{
    const auto s = recalls({0.0, 0.5, 1.0});
    const auto split = remove_outliers(s, OutlierPolicy::none());
    EXPECT_EQ(split.kept, s);
    EXPECT_TRUE(split.removed.empty());
}

TEST(RemoveOutliers, DropsLoneLowValue)
{
    std::vector<double> v(99, 0.5);
    v.push_back(0.0);
    const auto split = remove_outliers(recalls(v), OutlierPolicy::iqr(1.5));
    ASSERT_EQ(split.removed.size(), 1u);
    EXPECT_EQ(split.removed[0].value, 0.0);
    EXPECT_EQ(split.kept.size(), 99u);
}

TEST(RemoveOutliers, SymmetricSetUntouched)
{
    const auto split = remove_outliers(recalls({0.4, 0.5, 0.6}), OutlierPolicy::iqr(1.5));
    EXPECT_TRUE(split.removed.empty());
}

TEST(RemoveOutliers, FencesArePerMetric)
{
    auto s = recalls({0.5, 0.5, 0.5, 0.5});
    s.push_back({"q", Metric::precision, 0.0});
    s.push_back({"q", Metric::precision, 1.0});
    const auto split = remove_outliers(s, OutlierPolicy::iqr(1.5));
    EXPECT_TRUE(split.removed.empty());
    EXPECT_THROW(remove_outliers(s, OutlierPolicy::iqr(-1.0)), invalid_parameter);
}

TEST(QuantileSorted, TypeSevenInterpolation)
{
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.75), 3.25);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 4.0);
}

TEST(Summarize, Examples)
{
    const auto st = summarize(recalls({0.2, 0.4, 0.6}));
    EXPECT_EQ(st.count, 3u);
    EXPECT_EQ(st.publications, 3u);
    EXPECT_EQ(st.min, 0.2);
    EXPECT_EQ(st.max, 0.6);
    EXPECT_NEAR(st.mean, 0.4, 1e-15);

    const auto one = summarize(recalls({0.5}));
    EXPECT_EQ(one.min, 0.5);
    EXPECT_EQ(one.max, 0.5);
    EXPECT_EQ(one.mean, 0.5);

    EXPECT_THROW(summarize({}), empty_evidence);
}

TEST(Summarize, CountsDistinctPublications)
{
    const std::vector<EvidenceSample> s{
        {"a", Metric::recall, 0.1}, {"a", Metric::recall, 0.2}, {"b", Metric::recall, 0.3}};
    EXPECT_EQ(summarize(s).publications, 2u);
}

TEST(Summarize, MeanStaysInsideRange)
{
    const auto st = summarize(recalls(std::vector<double>(7, 0.1)));
    EXPECT_GE(st.mean, st.min);
    EXPECT_LE(st.mean, st.max);
}

TEST(ToPBox, Examples)
{
    EXPECT_EQ(to_pbox(default_recall_stats), (PBoxParams{0.07, 1.00, 0.74}));
    EXPECT_TRUE(to_pbox(SummaryStats{1, 1, 0.5, 0.5, 0.5}).degenerate());
    EXPECT_THROW(to_pbox(SummaryStats{3, 3, 0.1, 0.9, 0.95}), invalid_stats);
}

TEST(EngineeredCorpus, ReproducesDefaultRecallBox)
{
    const auto samples = load_samples_file(PIPEUNC_DATA_DIR "/recall_evidence.csv");
    const auto split = remove_outliers(samples, OutlierPolicy::iqr(1.5));
    EXPECT_TRUE(split.removed.empty());
    const auto box = to_pbox(summarize(filter_metric(split.kept, Metric::recall)));
    EXPECT_EQ(box, default_recall_pbox);
}
