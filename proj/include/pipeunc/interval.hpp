#ifndef PIPEUNC_INTERVAL_HPP
#define PIPEUNC_INTERVAL_HPP

#include <algorithm>
#include <limits>
#include <string>
#include <string_view>

#include "pipeunc/error.hpp"

namespace pipeunc
{

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    static constexpr Interval point(double v) noexcept { return {v, v}; }

    // Interval spanned by two values given in either order.
    static constexpr Interval spanning(double a, double b) noexcept { return {std::min(a, b), std::max(a, b)}; }

    // Identity element of hull(): absorbs the first value included.
    static constexpr Interval empty() noexcept
    {
        return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    }

    constexpr bool is_empty() const noexcept { return lo > hi; }
    constexpr double width() const noexcept { return hi - lo; }
    constexpr bool contains(double v) const noexcept { return lo <= v && v <= hi; }

    constexpr Interval& include(double v) noexcept
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        return *this;
    }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

// How a set of per-trial values becomes one interval.
enum class IntervalMode {
    extremes, // [min, max] over every value of both recall streams
    means,    // one value per stream (stream mean), oriented so lo <= hi
};

constexpr std::string_view to_string(IntervalMode m) noexcept
{
    return m == IntervalMode::extremes ? "extremes" : "means";
}

inline IntervalMode interval_mode_from_string(std::string_view s)
{
    if (s == "extremes" || s == "per-trial-extremes") {
        return IntervalMode::extremes;
    }
    if (s == "means" || s == "stream-means") {
        return IntervalMode::means;
    }
    throw invalid_parameter("unknown interval mode '" + std::string(s) + "'");
}

// Intervals of the three headline pipeline metrics under one mode.
struct MetricIntervals {
    Interval prevalence; // P_R(aias)
    Interval fix_rate;   // f(aias)
    Interval fn_ratio;
    IntervalMode mode = IntervalMode::extremes;
};

} // namespace pipeunc

#endif
