#ifndef PIPEUNC_CORE_MODEL_HPP
#define PIPEUNC_CORE_MODEL_HPP

// Closed-form metrics of a detect -> fix -> re-detect pipeline in which the
// same classifier is used before and after the fixer and recall is a known
// point value. Everything here is a pure function of its arguments.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "pipeunc/error.hpp"

namespace pipeunc
{

struct ClassifierProfile {
    double recall = 1.0;
    double precision = 1.0;   // only recall is needed for the headline metrics
    double specificity = 0.0; // used by the simulator's TN/FP bookkeeping
};

struct DomainSpec {
    std::size_t n_items = 0;
    double prevalence = 0.0;

    double positives() const noexcept { return prevalence * static_cast<double>(n_items); }
    double negatives() const noexcept { return static_cast<double>(n_items) - positives(); }
};

struct FixerSpec {
    double fix_rate = 0.0;
    double break_rate = 0.0;
};

// TP/FN/TN/FP tallies. Analytic code uses the real-valued form, the
// simulator the integer form.
template <class T>
struct BasicConfusionCounts {
    T tp{};
    T fn{};
    T tn{};
    T fp{};

    T total() const noexcept { return tp + fn + tn + fp; }
    T positives() const noexcept { return tp + fn; }

    BasicConfusionCounts& operator+=(const BasicConfusionCounts& o) noexcept
    {
        tp += o.tp;
        fn += o.fn;
        tn += o.tn;
        fp += o.fp;
        return *this;
    }

    friend bool operator==(const BasicConfusionCounts&, const BasicConfusionCounts&) = default;
};

using ConfusionCounts = BasicConfusionCounts<double>;
using ConfusionTally = BasicConfusionCounts<std::int64_t>;

struct PipelineOutcome {
    double fix_rate_actual = 0.0;  // f(aias)
    double prevalence_final = 0.0; // P_R(aias)
    double tpr_final = 0.0;
    double far_final = 0.0;
    double fn_final = 0.0;
    double fn_ratio = 1.0;
    double tp_final = 0.0;
    double fixer_load = 0.0; // items handed to the fixer and the second pass
    double fp_final = 0.0;
};

namespace detail
{

inline void require_fraction(double v, const char* name)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        throw invalid_parameter(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
}

inline void require_precision(double prec)
{
    if (!(prec > 0.0 && prec <= 1.0)) {
        throw invalid_parameter("precision must lie in (0, 1], got " + std::to_string(prec));
    }
}

// (1 - prec) / prec: false positives generated per true positive.
inline double fp_per_tp(double prec)
{
    require_precision(prec);
    return (1.0 - prec) / prec;
}

} // namespace detail

inline void validate(const ClassifierProfile& p)
{
    detail::require_fraction(p.recall, "recall");
    detail::require_fraction(p.precision, "precision");
    detail::require_fraction(p.specificity, "specificity");
}

inline void validate(const DomainSpec& d)
{
    detail::require_fraction(d.prevalence, "prevalence");
}

inline void validate(const FixerSpec& f)
{
    detail::require_fraction(f.fix_rate, "fix_rate");
    detail::require_fraction(f.break_rate, "break_rate");
}

// Round half away from zero, so 755.94 -> 756 and 332.5 -> 333.
inline std::int64_t round_count(double v)
{
    return static_cast<std::int64_t>(std::round(v));
}

inline ConfusionTally round_counts(const ConfusionCounts& c)
{
    return {round_count(c.tp), round_count(c.fn), round_count(c.tn), round_count(c.fp)};
}

/// Confusion counts of a single classifier on a domain, from recall and
/// precision alone. Values are continuous; use round_counts for integers.
inline ConfusionCounts derive_confusion(const ClassifierProfile& profile, const DomainSpec& domain)
{
    validate(profile);
    validate(domain);
    const double pos = domain.positives();
    const double n = static_cast<double>(domain.n_items);
    ConfusionCounts c;
    c.tp = profile.recall * pos;
    c.fn = (1.0 - profile.recall) * pos;
    c.fp = profile.recall * detail::fp_per_tp(profile.precision) * pos;
    c.tn = n - c.tp - c.fn - c.fp;
    return c;
}

/// False alert rate FP / (FP + TN) of the first classifier alone.
inline double first_far(const ClassifierProfile& profile, const DomainSpec& domain)
{
    validate(profile);
    validate(domain);
    const double k = detail::fp_per_tp(profile.precision);
    if (domain.prevalence >= 1.0) {
        throw degenerate_domain("FAR is undefined when prevalence = 1 (no negatives)");
    }
    return profile.recall * k * domain.prevalence / (1.0 - domain.prevalence);
}

inline double aias_fix_rate(const FixerSpec& fixer, double recall)
{
    return fixer.fix_rate * recall;
}

inline double aias_prevalence(const DomainSpec& domain, const FixerSpec& fixer, double recall)
{
    return (1.0 - fixer.fix_rate * recall) * domain.prevalence;
}

/// End-to-end true positive rate. The f_R = rec = 1 corner is 0: every
/// detected positive was fixed and nothing is left to detect.
inline double aias_tpr(double recall, const FixerSpec& fixer)
{
    if (fixer.fix_rate >= 1.0) {
        return 0.0;
    }
    return (1.0 - fixer.fix_rate) * recall * recall / (1.0 - fixer.fix_rate * recall);
}

inline double aias_far(const ClassifierProfile& profile, const DomainSpec& domain, const FixerSpec& fixer)
{
    const double k = detail::fp_per_tp(profile.precision);
    const double rec = profile.recall;
    const double denom = 1.0 - (1.0 - fixer.fix_rate * rec) * domain.prevalence;
    if (!(denom > 0.0)) {
        throw degenerate_domain("FAR(aias) is undefined: no negatives remain (prevalence = 1 and f_R * rec = 0)");
    }
    return rec * rec * k * (1.0 - fixer.fix_rate) * domain.prevalence / denom;
}

struct FalseNegatives {
    double fn_final = 0.0;
    double fn_ratio = 1.0;
};

/// FN at the pipeline end and its ratio to FN after the first pass. The
/// ratio is the analytic 1 + (1 - f_R) rec even when FN_1st is zero.
inline FalseNegatives aias_false_negatives(const DomainSpec& domain, const FixerSpec& fixer, double recall)
{
    const double ratio = 1.0 + (1.0 - fixer.fix_rate) * recall;
    return {ratio * (1.0 - recall) * domain.positives(), ratio};
}

inline double aias_true_positives(const DomainSpec& domain, const FixerSpec& fixer, double recall)
{
    return (1.0 - fixer.fix_rate) * recall * recall * domain.positives();
}

inline double fixer_load(const ClassifierProfile& profile, const DomainSpec& domain)
{
    detail::require_precision(profile.precision);
    return profile.recall / profile.precision * domain.positives();
}

inline double aias_false_positives(const ClassifierProfile& profile, const DomainSpec& domain,
                                   const FixerSpec& fixer)
{
    const double k = detail::fp_per_tp(profile.precision);
    const double rec = profile.recall;
    return rec * k * (1.0 - fixer.fix_rate) * rec * domain.positives();
}

/// All pipeline metrics for one configuration. `recall` overrides
/// profile.recall so callers can sweep recall with a fixed profile.
inline PipelineOutcome pipeline_outcome(ClassifierProfile profile, const DomainSpec& domain,
                                        const FixerSpec& fixer, double recall)
{
    profile.recall = recall;
    validate(profile);
    validate(domain);
    validate(fixer);
    detail::require_precision(profile.precision);

    PipelineOutcome out;
    out.fix_rate_actual = aias_fix_rate(fixer, recall);
    out.prevalence_final = aias_prevalence(domain, fixer, recall);
    out.tpr_final = aias_tpr(recall, fixer);
    out.far_final = aias_far(profile, domain, fixer);
    const auto fn = aias_false_negatives(domain, fixer, recall);
    out.fn_final = fn.fn_final;
    out.fn_ratio = fn.fn_ratio;
    out.tp_final = aias_true_positives(domain, fixer, recall);
    out.fixer_load = fixer_load(profile, domain);
    out.fp_final = aias_false_positives(profile, domain, fixer);
    return out;
}

} // namespace pipeunc

#endif
