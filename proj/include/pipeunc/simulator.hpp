#ifndef PIPEUNC_SIMULATOR_HPP
#define PIPEUNC_SIMULATOR_HPP

// Item-level Monte Carlo of the pipeline:
//
//   ground truth -> classifier -> fixer (positives only) -> same classifier
//   (everything the fixer saw) -> counter
//
// Every trial owns an Rng seeded from (master seed, stream, index), so the
// report does not depend on thread count or scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "pipeunc/core_model.hpp"
#include "pipeunc/error.hpp"
#include "pipeunc/interval.hpp"
#include "pipeunc/pbox.hpp"
#include "pipeunc/random.hpp"

namespace pipeunc
{

enum class StageLabel : std::uint8_t { unvisited, tp, fn, tn, fp };

struct Item {
    std::uint32_t id = 0;
    bool truly_vulnerable = false;
    StageLabel stage_label = StageLabel::unvisited;
    bool went_through_fixer = false;
    bool fixed = false;
    bool broken = false;
};

inline std::vector<Item> generate_ground_truth(const DomainSpec& domain, Rng& rng)
{
    validate(domain);
    if (domain.n_items == 0) {
        throw invalid_parameter("population must contain at least one item");
    }
    std::vector<Item> items(domain.n_items);
    for (std::size_t i = 0; i < items.size(); ++i) {
        items[i].id = static_cast<std::uint32_t>(i);
        items[i].truly_vulnerable = rng.bernoulli(domain.prevalence);
    }
    return items;
}

inline std::vector<Item> generate_ground_truth(const DomainSpec& domain, std::uint64_t seed)
{
    Rng rng(seed);
    return generate_ground_truth(domain, rng);
}

/// Labels each item against its current truly_vulnerable flag: vulnerable
/// items are TP with probability recall, the rest TN with probability
/// specificity. Two draws per item, in item order.
inline ConfusionTally classify(std::span<Item> items, const ClassifierProfile& profile, Rng& rng)
{
    detail::require_fraction(profile.recall, "recall");
    detail::require_fraction(profile.specificity, "specificity");
    ConfusionTally c;
    for (auto& item : items) {
        const bool hit = rng.bernoulli(profile.recall);
        const bool reject = rng.bernoulli(profile.specificity);
        if (item.truly_vulnerable) {
            item.stage_label = hit ? StageLabel::tp : StageLabel::fn;
            ++(hit ? c.tp : c.fn);
        } else {
            item.stage_label = reject ? StageLabel::tn : StageLabel::fp;
            ++(reject ? c.tn : c.fp);
        }
    }
    return c;
}

inline ConfusionTally classify(std::span<Item> items, const ClassifierProfile& profile, std::uint64_t seed)
{
    Rng rng(seed);
    return classify(items, profile, rng);
}

struct FixerTally {
    std::int64_t fixed = 0;
    std::int64_t broken = 0;
};

/// Runs the fixer over items the first classifier flagged positive. A fix
/// that is not also a break clears the vulnerability; a break sets it.
inline FixerTally apply_fixer(std::span<Item> items, const FixerSpec& fixer, Rng& rng)
{
    validate(fixer);
    FixerTally t;
    for (auto& item : items) {
        if (item.stage_label != StageLabel::tp && item.stage_label != StageLabel::fp) {
            throw invalid_parameter("fixer received an item not labeled positive");
        }
        const bool fix = rng.bernoulli(fixer.fix_rate);
        const bool brk = rng.bernoulli(fixer.break_rate);
        item.went_through_fixer = true;
        item.fixed = fix;
        item.broken = brk;
        if (brk) {
            item.truly_vulnerable = true;
        } else if (fix) {
            item.truly_vulnerable = false;
        }
        t.fixed += fix;
        t.broken += brk;
    }
    return t;
}

inline FixerTally apply_fixer(std::span<Item> items, const FixerSpec& fixer, std::uint64_t seed)
{
    Rng rng(seed);
    return apply_fixer(items, fixer, rng);
}

struct TrialOutcome {
    ConfusionTally counts_first;
    ConfusionTally counts_second; // only items that went through the fixer
    std::int64_t n_items = 0;
    std::int64_t initially_vulnerable = 0;
    double final_prevalence = 0.0;
    std::optional<double> real_fix_rate; // undefined without initial positives
    std::optional<double> fn_ratio;      // undefined when fn1 = 0 < fn2
    double recall_used = 0.0;
    std::uint64_t seed_used = 0;

    // Counter totals: items the fixer never saw keep their first label.
    ConfusionTally counts_final() const noexcept
    {
        return {counts_second.tp, counts_first.fn + counts_second.fn, counts_first.tn + counts_second.tn,
                counts_second.fp};
    }
};

/// One pass through the pipeline. `recall` overrides profile.recall. Stage
/// draws come from independent generators derived from `seed`.
inline TrialOutcome run_trial(const DomainSpec& domain, ClassifierProfile profile, const FixerSpec& fixer,
                              double recall, std::uint64_t seed)
{
    profile.recall = recall;
    Rng truth_rng(derive_seed(seed, 1, 0));
    Rng first_rng(derive_seed(seed, 2, 0));
    Rng fixer_rng(derive_seed(seed, 3, 0));
    Rng second_rng(derive_seed(seed, 4, 0));

    auto items = generate_ground_truth(domain, truth_rng);
    const auto initially_vulnerable =
        static_cast<std::int64_t>(std::count_if(items.begin(), items.end(), [](const Item& i) { return i.truly_vulnerable; }));

    TrialOutcome out;
    out.recall_used = recall;
    out.seed_used = seed;
    out.n_items = static_cast<std::int64_t>(items.size());
    out.initially_vulnerable = initially_vulnerable;
    out.counts_first = classify(items, profile, first_rng);

    // Positives first; the fixer and the second pass only see that prefix.
    const auto positives_end = std::stable_partition(items.begin(), items.end(), [](const Item& i) {
        return i.stage_label == StageLabel::tp || i.stage_label == StageLabel::fp;
    });
    std::span<Item> positives(items.begin(), positives_end);
    apply_fixer(positives, fixer, fixer_rng);
    out.counts_second = classify(positives, profile, second_rng);

    const auto fin = out.counts_final();
    if (fin.total() != out.n_items) {
        throw invariant_violation("trial lost items: counter total != population");
    }
    const auto n = static_cast<double>(out.n_items);
    out.final_prevalence = static_cast<double>(fin.tp + fin.fn) / n;
    if (initially_vulnerable > 0) {
        out.real_fix_rate = 1.0 - static_cast<double>(fin.tp + fin.fn) / static_cast<double>(initially_vulnerable);
    }
    const auto fn1 = out.counts_first.fn;
    if (fn1 > 0) {
        out.fn_ratio = static_cast<double>(fin.fn) / static_cast<double>(fn1);
    } else if (fin.fn == 0) {
        out.fn_ratio = 1.0;
    }
    return out;
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; results must be written to per-index slots.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct ExperimentConfig {
    DomainSpec domain{10000, 0.5};
    ClassifierProfile profile{}; // recall is ignored, it comes from the p-box
    FixerSpec fixer{0.5, 0.0};
    PBoxParams pbox = default_recall_pbox;
    std::size_t trials = 1000;
    std::uint64_t master_seed = 42;
    unsigned threads = 1; // does not affect results
};

struct UndefinedCounts {
    std::size_t real_fix_rate = 0;
    std::size_t fn_ratio = 0;
};

struct SimulationReport {
    ExperimentConfig config;
    RecallStreams streams;
    std::vector<TrialOutcome> optimistic_trials;
    std::vector<TrialOutcome> pessimistic_trials;
    MetricIntervals extremes;
    MetricIntervals means;
    UndefinedCounts undefined;

    const MetricIntervals& intervals(IntervalMode m) const noexcept
    {
        return m == IntervalMode::extremes ? extremes : means;
    }
};

namespace detail
{

// Mean of the defined values of one metric over one stream's trials.
template <class Get>
std::optional<double> stream_mean(const std::vector<TrialOutcome>& trials, Get get)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : trials) {
        if (const std::optional<double> v = get(t)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

inline void include_opt(Interval& iv, std::optional<double> v)
{
    if (v) {
        iv.include(*v);
    }
}

} // namespace detail

/// Aggregates per-trial outcomes of both streams into both interval modes.
/// Trials whose fix rate or FN ratio is undefined are skipped for that
/// metric and counted.
inline void aggregate(SimulationReport& r)
{
    auto prev = [](const TrialOutcome& t) { return std::optional<double>(t.final_prevalence); };
    auto fix = [](const TrialOutcome& t) { return t.real_fix_rate; };
    auto fnr = [](const TrialOutcome& t) { return t.fn_ratio; };

    r.extremes = {Interval::empty(), Interval::empty(), Interval::empty(), IntervalMode::extremes};
    r.undefined = {};
    for (const auto* stream : {&r.optimistic_trials, &r.pessimistic_trials}) {
        for (const auto& t : *stream) {
            r.extremes.prevalence.include(t.final_prevalence);
            detail::include_opt(r.extremes.fix_rate, t.real_fix_rate);
            detail::include_opt(r.extremes.fn_ratio, t.fn_ratio);
            r.undefined.real_fix_rate += !t.real_fix_rate;
            r.undefined.fn_ratio += !t.fn_ratio;
        }
    }

    r.means = {Interval::empty(), Interval::empty(), Interval::empty(), IntervalMode::means};
    for (const auto* stream : {&r.optimistic_trials, &r.pessimistic_trials}) {
        detail::include_opt(r.means.prevalence, detail::stream_mean(*stream, prev));
        detail::include_opt(r.means.fix_rate, detail::stream_mean(*stream, fix));
        detail::include_opt(r.means.fn_ratio, detail::stream_mean(*stream, fnr));
    }
}

/// Samples `trials` recall pairs from the p-box and runs one trial per
/// recall value per stream.
inline SimulationReport run_experiment(const ExperimentConfig& cfg)
{
    validate(cfg.domain);
    validate(cfg.fixer);
    validate(cfg.pbox);
    detail::require_fraction(cfg.profile.specificity, "specificity");
    if (cfg.trials == 0) {
        throw invalid_parameter("trials must be at least 1");
    }
    if (cfg.domain.n_items == 0) {
        throw invalid_parameter("population must contain at least one item");
    }

    SimulationReport r;
    r.config = cfg;
    r.streams = sample_recall_streams(cfg.pbox, cfg.trials, cfg.master_seed);
    r.optimistic_trials.resize(cfg.trials);
    r.pessimistic_trials.resize(cfg.trials);

    parallel_for(2 * cfg.trials, cfg.threads, [&](std::size_t k) {
        const bool opt = k < cfg.trials;
        const std::size_t i = opt ? k : k - cfg.trials;
        const double rec = opt ? r.streams.optimistic[i] : r.streams.pessimistic[i];
        const auto seed = derive_seed(cfg.master_seed, opt ? seed_tag::optimistic : seed_tag::pessimistic, i);
        (opt ? r.optimistic_trials : r.pessimistic_trials)[i] = run_trial(cfg.domain, cfg.profile, cfg.fixer, rec, seed);
    });

    aggregate(r);
    return r;
}

/// `trials` independent trials at one fixed recall value.
inline std::vector<TrialOutcome> run_fixed_recall(const DomainSpec& domain, const ClassifierProfile& profile,
                                                  const FixerSpec& fixer, double recall, std::size_t trials,
                                                  std::uint64_t master_seed, unsigned threads = 1)
{
    if (trials == 0) {
        throw invalid_parameter("trials must be at least 1");
    }
    std::vector<TrialOutcome> out(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        out[i] = run_trial(domain, profile, fixer, recall, derive_seed(master_seed, seed_tag::fixed, i));
    });
    return out;
}

} // namespace pipeunc

#endif
