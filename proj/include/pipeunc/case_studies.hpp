#ifndef PIPEUNC_CASE_STUDIES_HPP
#define PIPEUNC_CASE_STUDIES_HPP

// Two worked examples: binomial confidence intervals around the reported
// correct-patch rates of rule-based repair tools, and the arithmetic of a
// detector + repair-model pipeline with recall uncertainty wrapped around it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "pipeunc/core_model.hpp"
#include "pipeunc/error.hpp"
#include "pipeunc/evidence.hpp"
#include "pipeunc/interval.hpp"
#include "pipeunc/pbox.hpp"

namespace pipeunc
{

struct ToolRecord {
    std::string name;
    std::int64_t correct = 0;
    std::int64_t generated = 0;
};

// Correct / generated patch counts of the three best and three worst tools
// on Defects4J.
inline std::vector<ToolRecord> default_tool_records()
{
    return {
        {"ACS", 16, 22},     {"SimFix", 25, 68},  {"FixMiner", 12, 33},
        {"Kali-A", 3, 65},   {"DynaMoth", 1, 22}, {"Nopol", 1, 31},
    };
}

struct ProportionCI {
    double point = 0.0; // successes / trials
    double lo = 0.0;
    double hi = 0.0;
    double confidence = 0.95;
};

enum class CIMethod { agresti_coull, wilson };

constexpr std::string_view to_string(CIMethod m) noexcept
{
    return m == CIMethod::agresti_coull ? "agresti-coull" : "wilson";
}

inline CIMethod ci_method_from_string(std::string_view s)
{
    if (s == "agresti-coull") {
        return CIMethod::agresti_coull;
    }
    if (s == "wilson") {
        return CIMethod::wilson;
    }
    throw invalid_parameter("unknown interval method '" + std::string(s) + "'");
}

/// Two-sided standard normal critical value: z with P(|Z| <= z) = confidence.
inline double normal_critical_value(double confidence)
{
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw invalid_parameter("confidence must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + confidence / 2.0);
}

namespace detail
{

inline void require_counts(std::int64_t successes, std::int64_t trials)
{
    if (trials < 1) {
        throw invalid_parameter("trials must be at least 1");
    }
    if (successes < 0 || successes > trials) {
        throw invalid_parameter("successes must lie in [0, trials]");
    }
}

} // namespace detail

/// Agresti-Coull interval: Wald interval around the adjusted proportion
/// (x + z^2/2) / (n + z^2), clamped to [0, 1].
inline ProportionCI agresti_coull_interval(std::int64_t successes, std::int64_t trials, double confidence = 0.95)
{
    detail::require_counts(successes, trials);
    const double z = normal_critical_value(confidence);
    const double z2 = z * z;
    const double n_adj = static_cast<double>(trials) + z2;
    const double center = (static_cast<double>(successes) + z2 / 2.0) / n_adj;
    const double half = z * std::sqrt(center * (1.0 - center) / n_adj);
    return {static_cast<double>(successes) / static_cast<double>(trials), std::max(0.0, center - half),
            std::min(1.0, center + half), confidence};
}

/// Wilson score interval.
inline ProportionCI wilson_interval(std::int64_t successes, std::int64_t trials, double confidence = 0.95)
{
    detail::require_counts(successes, trials);
    const double z = normal_critical_value(confidence);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
    return {p, std::max(0.0, center - half), std::min(1.0, center + half), confidence};
}

inline ProportionCI proportion_interval(std::int64_t successes, std::int64_t trials, double confidence,
                                       CIMethod method)
{
    return method == CIMethod::agresti_coull ? agresti_coull_interval(successes, trials, confidence)
                                             : wilson_interval(successes, trials, confidence);
}

struct ToolInterval {
    std::string name;
    std::int64_t correct = 0;
    std::int64_t generated = 0;
    ProportionCI ci;
};

inline std::vector<ToolInterval> rule_based_case_study(const std::vector<ToolRecord>& tools, double confidence = 0.95,
                                                       CIMethod method = CIMethod::agresti_coull)
{
    std::vector<ToolInterval> rows;
    rows.reserve(tools.size());
    for (const auto& t : tools) {
        rows.push_back({t.name, t.correct, t.generated, proportion_interval(t.correct, t.generated, confidence, method)});
    }
    return rows;
}

/// Tool records from CSV with header `name,correct,generated`.
inline std::vector<ToolRecord> load_tool_records(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_content_line(in, line, line_no)) {
        throw parse_error(line_no + 1, "missing header 'name,correct,generated'");
    }
    const auto header = detail::split_csv(line);
    if (header.size() != 3 || header[0] != "name" || header[1] != "correct" || header[2] != "generated") {
        throw parse_error(line_no, "expected header 'name,correct,generated'");
    }
    std::vector<ToolRecord> tools;
    while (detail::next_content_line(in, line, line_no)) {
        const auto f = detail::split_csv(line);
        if (f.size() != 3 || f[0].empty()) {
            throw parse_error(line_no, "expected 'name,correct,generated'");
        }
        ToolRecord r{std::string(f[0]), 0, 0};
        for (auto [field, dst] : {std::pair{f[1], &r.correct}, std::pair{f[2], &r.generated}}) {
            const auto* end = field.data() + field.size();
            const auto [ptr, ec] = std::from_chars(field.data(), end, *dst);
            if (ec != std::errc() || ptr != end || field.empty()) {
                throw parse_error(line_no, "not an integer: '" + std::string(field) + "'");
            }
        }
        if (r.generated < 1 || r.correct < 0 || r.correct > r.generated) {
            throw validation_error(line_no, "require 0 <= correct <= generated and generated >= 1");
        }
        tools.push_back(std::move(r));
    }
    return tools;
}

inline std::vector<ToolRecord> load_tool_records_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open tool-record file '" + path + "'");
    }
    return load_tool_records(in);
}

// Counts obtained by rounding after every stage, as a reader would do by hand.
struct RoundedChain {
    double recall = 0.0;
    std::int64_t detected = 0;
    std::int64_t fixed = 0;
    std::int64_t residual = 0;

    friend bool operator==(const RoundedChain&, const RoundedChain&) = default;
};

inline RoundedChain rounded_chain(std::int64_t n_items, double recall, double repair_accuracy)
{
    RoundedChain c;
    c.recall = recall;
    c.detected = round_count(static_cast<double>(n_items) * recall);
    c.fixed = round_count(static_cast<double>(c.detected) * repair_accuracy);
    c.residual = c.detected - c.fixed;
    return c;
}

struct ComposedCaseReport {
    std::int64_t n_items = 0;
    double detector_recall = 0.0;
    double repair_accuracy = 0.0;
    RoundedChain point;            // at the reported recall
    double point_fix_rate = 0.0;   // f_R * rec at the reported recall
    double max_fix_rate = 0.0;     // f_R * 1: no recall can push f(aias) above f_R
    MetricIntervals extremes;      // recall pushed through the p-box, both modes
    MetricIntervals means;
    RoundedChain worst_chain;      // rounded chain at the pessimistic recall extreme
    RoundedChain best_chain;       // and at the optimistic extreme
    Interval recall_extremes;
    std::vector<std::string> notes;
};

/// Reported recall and repair accuracy through the pipeline, then the same
/// with recall replaced by samples from `pbox`.
inline ComposedCaseReport composed_pipeline_case(std::int64_t n_items, double detector_recall, double repair_accuracy,
                                                 const PBoxParams& pbox, std::size_t samples = 1000,
                                                 std::uint64_t seed = 42)
{
    if (n_items < 1) {
        throw invalid_parameter("n_items must be at least 1");
    }
    detail::require_fraction(detector_recall, "detector recall");
    detail::require_fraction(repair_accuracy, "repair accuracy");
    validate(pbox);

    ComposedCaseReport r;
    r.n_items = n_items;
    r.detector_recall = detector_recall;
    r.repair_accuracy = repair_accuracy;
    r.point = rounded_chain(n_items, detector_recall, repair_accuracy);

    const FixerSpec fixer{repair_accuracy, 0.0};
    const DomainSpec domain{static_cast<std::size_t>(n_items), 1.0};
    r.point_fix_rate = aias_fix_rate(fixer, detector_recall);
    r.max_fix_rate = aias_fix_rate(fixer, 1.0);

    const auto streams = sample_recall_streams(pbox, samples, seed);
    r.extremes = propagate_interval(domain, fixer, streams, IntervalMode::extremes);
    r.means = propagate_interval(domain, fixer, streams, IntervalMode::means);

    r.recall_extremes = Interval::empty();
    for (const auto* s : {&streams.optimistic, &streams.pessimistic}) {
        for (double v : *s) {
            r.recall_extremes.include(v);
        }
    }
    r.worst_chain = rounded_chain(n_items, r.recall_extremes.lo, repair_accuracy);
    r.best_chain = rounded_chain(n_items, r.recall_extremes.hi, repair_accuracy);

    r.notes.push_back("the end-to-end fix rate (repair accuracy * recall) cannot exceed the repair accuracy " + std::to_string(r.max_fix_rate) +
                      " for any recall; a larger upper bound is not derivable from this model");
    return r;
}

} // namespace pipeunc

#endif
