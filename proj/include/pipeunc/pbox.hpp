#ifndef PIPEUNC_PBOX_HPP
#define PIPEUNC_PBOX_HPP

// Recall uncertainty as a (min, max, mean) p-box: the set of all CDFs on
// [a, b] with mean mu. Sampling goes through the inverses of its two
// bounding CDFs and the samples are pushed through the pipeline formulas.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pipeunc/core_model.hpp"
#include "pipeunc/error.hpp"
#include "pipeunc/interval.hpp"
#include "pipeunc/random.hpp"

namespace pipeunc
{

struct PBoxParams {
    double min_a = 0.0;
    double max_b = 0.0;
    double mean_mu = 0.0;

    bool degenerate() const noexcept { return min_a == max_b; }

    // p at which both bounding CDFs switch branch; 1 for a degenerate box.
    double threshold() const noexcept { return degenerate() ? 1.0 : (max_b - mean_mu) / (max_b - min_a); }

    friend bool operator==(const PBoxParams&, const PBoxParams&) = default;
};

// Recall statistics of the literature corpus behind the built-in defaults.
inline constexpr PBoxParams default_recall_pbox{0.07, 1.00, 0.74};

inline void validate(const PBoxParams& box)
{
    detail::require_fraction(box.min_a, "pbox min");
    detail::require_fraction(box.max_b, "pbox max");
    if (!(box.min_a <= box.mean_mu && box.mean_mu <= box.max_b)) {
        throw invalid_parameter("pbox requires min <= mean <= max, got (" + std::to_string(box.min_a) + ", " +
                                std::to_string(box.max_b) + ", " + std::to_string(box.mean_mu) + ")");
    }
}

namespace detail
{

inline void require_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw invalid_parameter("p must lie in [0, 1], got " + std::to_string(p));
    }
}

} // namespace detail

/// Inverse of the lower CDF bound. For a given p it returns the largest
/// recall any CDF in the box allows, so these are the optimistic samples.
/// p = 0 is set-valued ([a, mu]) and resolved with a uniform draw from rng.
inline double inverse_lower(const PBoxParams& box, double p, Rng& rng)
{
    detail::require_probability(p);
    const double a = box.min_a;
    const double b = box.max_b;
    const double mu = box.mean_mu;
    if (box.degenerate()) {
        return a;
    }
    if (p == 0.0) {
        return rng.uniform(a, mu);
    }
    if (p < box.threshold()) {
        return (p * a - mu) / (p - 1.0);
    }
    return b;
}

/// Inverse of the upper CDF bound: the pessimistic (smaller) recall for p.
/// p = 1 is set-valued ([mu, b]) and resolved with a uniform draw.
inline double inverse_upper(const PBoxParams& box, double p, Rng& rng)
{
    detail::require_probability(p);
    const double a = box.min_a;
    const double b = box.max_b;
    const double mu = box.mean_mu;
    if (box.degenerate()) {
        return a;
    }
    if (p <= box.threshold()) {
        return a;
    }
    if (p < 1.0) {
        return b - (b - mu) / p;
    }
    return rng.uniform(mu, b);
}

// Expectations of the two inverses under p ~ U(0, 1).
inline double expected_optimistic_recall(const PBoxParams& box)
{
    if (box.degenerate() || box.mean_mu == box.min_a) {
        return box.min_a;
    }
    const double t = box.threshold();
    return box.min_a * t - (box.mean_mu - box.min_a) * std::log1p(-t) + box.max_b * (1.0 - t);
}

inline double expected_pessimistic_recall(const PBoxParams& box)
{
    if (box.degenerate()) {
        return box.min_a;
    }
    const double t = box.threshold();
    if (t <= 0.0) {
        return box.max_b; // mean == max: the upper branch is b - 0/p
    }
    return box.min_a * t + box.max_b * (1.0 - t) + (box.max_b - box.mean_mu) * std::log(t);
}

struct RecallStreams {
    std::vector<double> optimistic;  // inverse_lower samples (larger recalls)
    std::vector<double> pessimistic; // inverse_upper samples (smaller recalls)
    std::vector<double> p_values;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return p_values.size(); }
};

/// Draws n uniform p values from `seed` and maps each through both
/// inverses. Both streams share the same p list.
inline RecallStreams sample_recall_streams(const PBoxParams& box, std::size_t n, std::uint64_t seed)
{
    validate(box);
    if (n == 0) {
        throw invalid_parameter("number of recall samples must be at least 1");
    }
    RecallStreams s;
    s.seed = seed;
    s.p_values.reserve(n);
    s.optimistic.reserve(n);
    s.pessimistic.reserve(n);

    Rng p_rng(derive_seed(seed, seed_tag::p_values, 0));
    Rng endpoint_rng(derive_seed(seed, seed_tag::endpoints, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const double p = p_rng.uniform01();
        s.p_values.push_back(p);
        s.optimistic.push_back(inverse_lower(box, p, endpoint_rng));
        s.pessimistic.push_back(inverse_upper(box, p, endpoint_rng));
    }
    return s;
}

namespace detail
{

inline double mean_of(std::span<const double> xs)
{
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

} // namespace detail

/// Pushes every sampled recall through the closed-form prevalence, fix rate
/// and FN ratio. The best-case (low prevalence, high fix rate) endpoints come
/// from the optimistic stream.
inline MetricIntervals propagate_interval(const DomainSpec& domain, const FixerSpec& fixer,
                                          const RecallStreams& streams, IntervalMode mode)
{
    if (streams.optimistic.empty() || streams.pessimistic.empty()) {
        throw invalid_parameter("cannot propagate empty recall streams");
    }
    validate(domain);
    validate(fixer);

    MetricIntervals out{Interval::empty(), Interval::empty(), Interval::empty(), mode};
    auto take = [&](double rec) {
        out.prevalence.include(aias_prevalence(domain, fixer, rec));
        out.fix_rate.include(aias_fix_rate(fixer, rec));
        out.fn_ratio.include(aias_false_negatives(domain, fixer, rec).fn_ratio);
    };

    if (mode == IntervalMode::extremes) {
        for (double r : streams.optimistic) {
            take(r);
        }
        for (double r : streams.pessimistic) {
            take(r);
        }
    } else {
        take(detail::mean_of(streams.optimistic));
        take(detail::mean_of(streams.pessimistic));
    }
    return out;
}

} // namespace pipeunc

#endif
