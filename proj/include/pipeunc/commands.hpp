#ifndef PIPEUNC_COMMANDS_HPP
#define PIPEUNC_COMMANDS_HPP

// Command layer behind the `pipeunc` executable. Each command turns a
// validated RunConfig into a JSON report envelope
//
//   { "version": ..., "config": {...}, "results": {...} }
//
// and the table / CSV renderings are pure functions of that envelope.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pipeunc/case_studies.hpp"
#include "pipeunc/core_model.hpp"
#include "pipeunc/error.hpp"
#include "pipeunc/evidence.hpp"
#include "pipeunc/interval.hpp"
#include "pipeunc/pbox.hpp"
#include "pipeunc/simulator.hpp"

namespace pipeunc
{

inline constexpr std::string_view version = "0.1.0";

using json = nlohmann::json;

enum class OutputFormat { table, csv, json };

struct RunConfig {
    std::string command = "simulate";

    std::size_t n_items = 10000;
    std::vector<double> prevalence{0.10, 0.50, 1.00};
    std::vector<double> fix_rate{0.50, 0.70, 0.90, 1.00};
    double recall = 1.0; // point recall (analytic) or detector recall (composed case)
    double precision = 1.0;
    double specificity = 0.0;
    double break_rate = 0.0;

    PBoxParams pbox = default_recall_pbox;
    std::string evidence;              // CSV path; when set it replaces pbox
    std::string outliers = "iqr";      // none | iqr
    double iqr_k = 1.5;

    std::size_t trials = 1000;
    std::uint64_t seed = 42;
    std::string mode = "both";         // extremes | means | both
    bool with_pbox = false;            // analytic: also propagate the p-box
    bool include_trials = false;       // simulate: per-trial values in JSON

    double confidence = 0.95;
    std::string ci_method = "agresti-coull";
    std::string which = "rule-based";  // rule-based | composed
    std::string tools;                 // tool-record CSV path
    double repair_accuracy = 0.44;

    // Output plumbing; not part of the reproducible configuration.
    std::string output = "table";
    std::string out;
    unsigned threads = 1;
    bool timestamp = false;
};

/// Defaults per subcommand. The composed case study models an 879-sample
/// dataset with a 0.86-recall detector.
inline RunConfig default_config(std::string_view command)
{
    RunConfig c;
    c.command = std::string(command);
    if (command == "case-study") {
        c.n_items = 879;
        c.recall = 0.86;
    }
    return c;
}

inline std::vector<IntervalMode> modes_of(const RunConfig& c)
{
    if (c.mode == "both") {
        return {IntervalMode::extremes, IntervalMode::means};
    }
    return {interval_mode_from_string(c.mode)};
}

inline OutputFormat output_format_of(const RunConfig& c)
{
    if (c.output == "table") {
        return OutputFormat::table;
    }
    if (c.output == "csv") {
        return OutputFormat::csv;
    }
    if (c.output == "json") {
        return OutputFormat::json;
    }
    throw invalid_parameter("output: expected table, csv or json, got '" + c.output + "'");
}

namespace detail
{

inline void check(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) {
        throw invalid_parameter(field + ": " + what);
    }
}

inline bool is_fraction(double v)
{
    return v >= 0.0 && v <= 1.0;
}

} // namespace detail

/// Range checks on every field, reported with the field name. Runs before
/// any command does work.
inline void validate(const RunConfig& c)
{
    using detail::check;
    using detail::is_fraction;
    check(c.command == "analytic" || c.command == "simulate" || c.command == "evidence" ||
              c.command == "case-study" || c.command == "pbox-sample",
          "command", "unknown command '" + c.command + "'");
    check(c.n_items >= 1, "n-items", "must be at least 1");
    check(c.n_items <= 0xffffffffULL, "n-items", "must fit in 32 bits");
    if (c.command == "analytic" || c.command == "simulate") {
        check(!c.prevalence.empty(), "prevalence", "grid must not be empty");
        check(!c.fix_rate.empty(), "fix-rate", "grid must not be empty");
    }
    for (double v : c.prevalence) {
        check(is_fraction(v), "prevalence", "values must lie in [0, 1]");
    }
    for (double v : c.fix_rate) {
        check(is_fraction(v), "fix-rate", "values must lie in [0, 1]");
    }
    check(is_fraction(c.recall), "recall", "must lie in [0, 1]");
    check(c.precision > 0.0 && c.precision <= 1.0, "precision", "must lie in (0, 1]");
    check(is_fraction(c.specificity), "specificity", "must lie in [0, 1]");
    check(is_fraction(c.break_rate), "break-rate", "must lie in [0, 1]");
    check(is_fraction(c.pbox.min_a) && is_fraction(c.pbox.max_b), "pbox", "min and max must lie in [0, 1]");
    check(c.pbox.min_a <= c.pbox.mean_mu && c.pbox.mean_mu <= c.pbox.max_b, "pbox", "requires min <= mean <= max");
    check(c.outliers == "none" || c.outliers == "iqr", "outliers", "expected none or iqr");
    check(c.iqr_k >= 0.0, "iqr-k", "must be nonnegative");
    check(c.trials >= 1, "trials", "must be at least 1");
    check(c.mode == "both" || c.mode == "extremes" || c.mode == "means", "mode", "expected extremes, means or both");
    check(c.confidence > 0.0 && c.confidence < 1.0, "confidence", "must lie in (0, 1)");
    check(c.ci_method == "agresti-coull" || c.ci_method == "wilson", "ci-method", "expected agresti-coull or wilson");
    check(c.which == "rule-based" || c.which == "composed", "which", "expected rule-based or composed");
    check(is_fraction(c.repair_accuracy), "repair-accuracy", "must lie in [0, 1]");
    check(c.command != "evidence" || !c.evidence.empty(), "evidence", "a CSV path is required");
    output_format_of(c);
}

inline json to_json(const PBoxParams& b)
{
    return {{"min", b.min_a}, {"max", b.max_b}, {"mean", b.mean_mu}};
}

inline PBoxParams pbox_from_json(const json& j)
{
    return {j.at("min").get<double>(), j.at("max").get<double>(), j.at("mean").get<double>()};
}

inline json to_json(const Interval& iv)
{
    if (iv.is_empty()) {
        return {{"lo", nullptr}, {"hi", nullptr}};
    }
    return {{"lo", iv.lo}, {"hi", iv.hi}};
}

/// The reproducible part of a RunConfig. Output plumbing (format, path,
/// thread count, timestamps) is left out: it does not change results.
inline json to_json(const RunConfig& c)
{
    return {
        {"command", c.command},
        {"n_items", c.n_items},
        {"prevalence", c.prevalence},
        {"fix_rate", c.fix_rate},
        {"recall", c.recall},
        {"precision", c.precision},
        {"specificity", c.specificity},
        {"break_rate", c.break_rate},
        {"pbox", to_json(c.pbox)},
        {"evidence", c.evidence},
        {"outliers", c.outliers},
        {"iqr_k", c.iqr_k},
        {"trials", c.trials},
        {"seed", c.seed},
        {"mode", c.mode},
        {"with_pbox", c.with_pbox},
        {"include_trials", c.include_trials},
        {"confidence", c.confidence},
        {"ci_method", c.ci_method},
        {"which", c.which},
        {"tools", c.tools},
        {"repair_accuracy", c.repair_accuracy},
    };
}

inline RunConfig config_from_json(const json& j)
{
    RunConfig c = default_config(j.at("command").get<std::string>());
    c.n_items = j.at("n_items").get<std::size_t>();
    c.prevalence = j.at("prevalence").get<std::vector<double>>();
    c.fix_rate = j.at("fix_rate").get<std::vector<double>>();
    c.recall = j.at("recall").get<double>();
    c.precision = j.at("precision").get<double>();
    c.specificity = j.at("specificity").get<double>();
    c.break_rate = j.at("break_rate").get<double>();
    c.pbox = pbox_from_json(j.at("pbox"));
    c.evidence = j.at("evidence").get<std::string>();
    c.outliers = j.at("outliers").get<std::string>();
    c.iqr_k = j.at("iqr_k").get<double>();
    c.trials = j.at("trials").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = j.at("mode").get<std::string>();
    c.with_pbox = j.at("with_pbox").get<bool>();
    c.include_trials = j.at("include_trials").get<bool>();
    c.confidence = j.at("confidence").get<double>();
    c.ci_method = j.at("ci_method").get<std::string>();
    c.which = j.at("which").get<std::string>();
    c.tools = j.at("tools").get<std::string>();
    c.repair_accuracy = j.at("repair_accuracy").get<double>();
    return c;
}

namespace detail
{

inline json envelope(const RunConfig& c, json results)
{
    return {{"version", std::string(version)}, {"config", to_json(c)}, {"results", std::move(results)}};
}

inline json opt_json(std::optional<double> v)
{
    return v ? json(*v) : json(nullptr);
}

inline OutlierPolicy outlier_policy_of(const RunConfig& c)
{
    return c.outliers == "none" ? OutlierPolicy::none() : OutlierPolicy::iqr(c.iqr_k);
}

struct EvidenceDigest {
    std::vector<EvidenceSample> removed;
    std::optional<SummaryStats> recall;
    std::optional<SummaryStats> precision;
};

inline EvidenceDigest digest_evidence(const RunConfig& c)
{
    const auto samples = load_samples_file(c.evidence);
    auto split = remove_outliers(samples, outlier_policy_of(c));
    EvidenceDigest d;
    d.removed = std::move(split.removed);
    if (auto r = filter_metric(split.kept, Metric::recall); !r.empty()) {
        d.recall = summarize(r);
    }
    if (auto p = filter_metric(split.kept, Metric::precision); !p.empty()) {
        d.precision = summarize(p);
    }
    return d;
}

// The p-box a run uses: derived from the evidence file when one is given.
inline PBoxParams effective_pbox(const RunConfig& c)
{
    if (c.evidence.empty()) {
        return c.pbox;
    }
    const auto d = digest_evidence(c);
    if (!d.recall) {
        throw empty_evidence("evidence file '" + c.evidence + "' has no recall samples");
    }
    return to_pbox(*d.recall);
}

inline json to_json(const SummaryStats& s)
{
    return {{"count", s.count}, {"publications", s.publications}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

} // namespace detail

/// Point-recall pipeline metrics over the prevalence x fix-rate grid.
/// Undefined cells (fix rate at P_R = 0, FAR with no negatives) are null.
inline json cmd_analytic(const RunConfig& c)
{
    validate(c);
    const ClassifierProfile profile{c.recall, c.precision, c.specificity};
    std::optional<RecallStreams> streams;
    if (c.with_pbox) {
        streams = sample_recall_streams(detail::effective_pbox(c), c.trials, c.seed);
    }

    json cells = json::array();
    for (double pr : c.prevalence) {
        for (double fr : c.fix_rate) {
            const DomainSpec domain{c.n_items, pr};
            const FixerSpec fixer{fr, c.break_rate};
            json cell{{"prevalence", pr}, {"fix_rate", fr}, {"recall", c.recall}};
            const auto fn = aias_false_negatives(domain, fixer, c.recall);
            cell["fix_rate_actual"] = pr > 0.0 ? json(aias_fix_rate(fixer, c.recall)) : json(nullptr);
            cell["prevalence_final"] = aias_prevalence(domain, fixer, c.recall);
            cell["tpr_final"] = aias_tpr(c.recall, fixer);
            try {
                cell["far_final"] = aias_far(profile, domain, fixer);
            } catch (const degenerate_domain&) {
                cell["far_final"] = nullptr;
            }
            cell["fn_final"] = fn.fn_final;
            cell["fn_ratio"] = fn.fn_ratio;
            cell["tp_final"] = aias_true_positives(domain, fixer, c.recall);
            cell["fp_final"] = aias_false_positives(profile, domain, fixer);
            cell["fixer_load"] = fixer_load(profile, domain);
            if (streams) {
                for (auto m : modes_of(c)) {
                    const auto iv = propagate_interval(domain, fixer, *streams, m);
                    cell["pbox_" + std::string(to_string(m))] = {{"prevalence_final", to_json(iv.prevalence)},
                                                                 {"fix_rate_actual", to_json(iv.fix_rate)},
                                                                 {"fn_ratio", to_json(iv.fn_ratio)}};
                }
            }
            cells.push_back(std::move(cell));
        }
    }
    return detail::envelope(c, {{"cells", std::move(cells)}});
}

/// Monte Carlo intervals per grid cell, keyed by metric.
inline json cmd_simulate(const RunConfig& c)
{
    validate(c);
    const PBoxParams box = detail::effective_pbox(c);
    const auto modes = modes_of(c);

    json results{{"pbox", to_json(box)},
                 {"final_prevalence", json::array()},
                 {"real_fix_rate", json::array()},
                 {"fn_ratio", json::array()}};
    for (double pr : c.prevalence) {
        for (double fr : c.fix_rate) {
            ExperimentConfig ec;
            ec.domain = {c.n_items, pr};
            ec.profile = {0.0, c.precision, c.specificity};
            ec.fixer = {fr, c.break_rate};
            ec.pbox = box;
            ec.trials = c.trials;
            ec.master_seed = c.seed;
            ec.threads = c.threads;
            const auto rep = run_experiment(ec);

            auto trial_values = [&](auto get) {
                json arr = json::array();
                for (const auto* s : {&rep.optimistic_trials, &rep.pessimistic_trials}) {
                    for (const auto& t : *s) {
                        arr.push_back(detail::opt_json(get(t)));
                    }
                }
                return arr;
            };
            auto emit = [&](const char* metric, auto pick, auto get, std::size_t undefined) {
                for (auto m : modes) {
                    json e = to_json(pick(rep.intervals(m)));
                    e["prevalence"] = pr;
                    e["fix_rate"] = fr;
                    e["mode"] = std::string(to_string(m));
                    e["undefined_trials"] = undefined;
                    if (c.include_trials) {
                        e["trials"] = trial_values(get);
                    }
                    results[metric].push_back(std::move(e));
                }
            };
            emit(
                "final_prevalence", [](const MetricIntervals& i) { return i.prevalence; },
                [](const TrialOutcome& t) { return std::optional<double>(t.final_prevalence); }, 0);
            emit(
                "real_fix_rate", [](const MetricIntervals& i) { return i.fix_rate; },
                [](const TrialOutcome& t) { return t.real_fix_rate; }, rep.undefined.real_fix_rate);
            emit(
                "fn_ratio", [](const MetricIntervals& i) { return i.fn_ratio; },
                [](const TrialOutcome& t) { return t.fn_ratio; }, rep.undefined.fn_ratio);
        }
    }
    return detail::envelope(c, std::move(results));
}

/// Summary statistics, derived p-box and the outlier listing of an
/// evidence CSV.
inline json cmd_evidence(const RunConfig& c)
{
    validate(c);
    const auto d = detail::digest_evidence(c);
    json results;
    results["outlier_policy"] = c.outliers == "none" ? json("none") : json("iqr(" + std::to_string(c.iqr_k) + ")");
    results["recall"] = d.recall ? json{{"stats", detail::to_json(*d.recall)}, {"pbox", to_json(to_pbox(*d.recall))}}
                                 : json(nullptr);
    results["precision"] = d.precision ? json{{"stats", detail::to_json(*d.precision)}} : json(nullptr);
    json removed = json::array();
    for (const auto& s : d.removed) {
        removed.push_back({{"source_id", s.source_id}, {"metric", std::string(to_string(s.metric))}, {"value", s.value}});
    }
    results["removed"] = std::move(removed);
    if (!d.recall && !d.precision) {
        throw empty_evidence("evidence file '" + c.evidence + "' contains no samples");
    }
    return detail::envelope(c, std::move(results));
}

inline json cmd_case_study(const RunConfig& c)
{
    validate(c);
    json results{{"which", c.which}};
    if (c.which == "rule-based") {
        const auto tools = c.tools.empty() ? default_tool_records() : load_tool_records_file(c.tools);
        const auto method = ci_method_from_string(c.ci_method);
        json rows = json::array();
        for (const auto& r : rule_based_case_study(tools, c.confidence, method)) {
            rows.push_back({{"name", r.name},
                            {"correct", r.correct},
                            {"generated", r.generated},
                            {"point", r.ci.point},
                            {"lo", r.ci.lo},
                            {"hi", r.ci.hi}});
        }
        results["method"] = c.ci_method;
        results["confidence"] = c.confidence;
        results["tools"] = std::move(rows);
    } else {
        const auto box = detail::effective_pbox(c);
        const auto r = composed_pipeline_case(static_cast<std::int64_t>(c.n_items), c.recall, c.repair_accuracy, box,
                                              c.trials, c.seed);
        auto chain = [](const RoundedChain& ch) {
            return json{{"recall", ch.recall}, {"detected", ch.detected}, {"fixed", ch.fixed}, {"residual", ch.residual}};
        };
        results["pbox"] = to_json(box);
        results["point"] = chain(r.point);
        results["point_fix_rate"] = r.point_fix_rate;
        results["max_fix_rate"] = r.max_fix_rate;
        results["worst_chain"] = chain(r.worst_chain);
        results["best_chain"] = chain(r.best_chain);
        for (auto m : modes_of(c)) {
            const auto& iv = m == IntervalMode::extremes ? r.extremes : r.means;
            json e = to_json(iv.fix_rate);
            e["mode"] = std::string(to_string(m));
            results["fix_rate"].push_back(std::move(e));
        }
        results["notes"] = r.notes;
    }
    return detail::envelope(c, std::move(results));
}

inline json cmd_pbox_sample(const RunConfig& c)
{
    validate(c);
    const auto box = detail::effective_pbox(c);
    const auto s = sample_recall_streams(box, c.trials, c.seed);
    return detail::envelope(c, {{"pbox", to_json(box)},
                                {"threshold", box.threshold()},
                                {"p", s.p_values},
                                {"optimistic", s.optimistic},
                                {"pessimistic", s.pessimistic},
                                {"mean_optimistic", detail::mean_of(s.optimistic)},
                                {"mean_pessimistic", detail::mean_of(s.pessimistic)},
                                {"expected_optimistic", expected_optimistic_recall(box)},
                                {"expected_pessimistic", expected_pessimistic_recall(box)}});
}

inline json run_command(const RunConfig& c)
{
    if (c.command == "analytic") {
        return cmd_analytic(c);
    }
    if (c.command == "simulate") {
        return cmd_simulate(c);
    }
    if (c.command == "evidence") {
        return cmd_evidence(c);
    }
    if (c.command == "case-study") {
        return cmd_case_study(c);
    }
    if (c.command == "pbox-sample") {
        return cmd_pbox_sample(c);
    }
    throw invalid_parameter("command: unknown command '" + c.command + "'");
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail
{

inline std::string fmt2(const json& v)
{
    if (v.is_null()) {
        return "n/a";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v.get<double>());
    return buf;
}

inline std::string fmt_interval(const json& e)
{
    if (e.at("lo").is_null()) {
        return "n/a";
    }
    return "[" + fmt2(e.at("lo")) + ", " + fmt2(e.at("hi")) + "]";
}

inline std::string pad(std::string s, std::size_t w)
{
    if (s.size() < w) {
        s.append(w - s.size(), ' ');
    }
    return s;
}

// Rows = prevalence, columns = fix rate, one grid per metric and mode.
inline void render_grid(std::ostream& os, const std::string& title, const std::vector<double>& prevalences,
                        const std::vector<double>& fix_rates, auto cell_text)
{
    os << title << '\n';
    os << pad("P_R", 8);
    for (double fr : fix_rates) {
        os << pad("f_R=" + fmt2(fr), 16);
    }
    os << '\n';
    for (double pr : prevalences) {
        os << pad(fmt2(pr), 8);
        for (double fr : fix_rates) {
            os << pad(cell_text(pr, fr), 16);
        }
        os << '\n';
    }
    os << '\n';
}

inline std::string csv_num(const json& v)
{
    return v.is_null() ? std::string() : v.dump();
}

} // namespace detail

/// Human-readable rendering; intervals to two decimals.
inline std::string render_table(const json& env)
{
    std::ostringstream os;
    const auto& cfg = env.at("config");
    const auto& res = env.at("results");
    const std::string cmd = cfg.at("command").get<std::string>();
    const auto prevalences = cfg.at("prevalence").get<std::vector<double>>();
    const auto fix_rates = cfg.at("fix_rate").get<std::vector<double>>();

    if (cmd == "simulate") {
        const auto& pb = res.at("pbox");
        os << "recall p-box (min, max, mean) = (" << detail::fmt2(pb.at("min")) << ", " << detail::fmt2(pb.at("max"))
           << ", " << detail::fmt2(pb.at("mean")) << "), trials per stream = " << cfg.at("trials").get<std::size_t>()
           << ", N = " << cfg.at("n_items").get<std::size_t>() << ", seed = " << cfg.at("seed").get<std::uint64_t>()
           << "\n\n";
        for (const char* metric : {"final_prevalence", "real_fix_rate", "fn_ratio"}) {
            std::vector<std::string> seen_modes;
            for (const auto& e : res.at(metric)) {
                const auto m = e.at("mode").get<std::string>();
                if (std::find(seen_modes.begin(), seen_modes.end(), m) == seen_modes.end()) {
                    seen_modes.push_back(m);
                }
            }
            for (const auto& m : seen_modes) {
                detail::render_grid(os, std::string(metric) + " (" + m + ")", prevalences, fix_rates,
                                    [&](double pr, double fr) {
                                        for (const auto& e : res.at(metric)) {
                                            if (e.at("mode") == m && e.at("prevalence").get<double>() == pr &&
                                                e.at("fix_rate").get<double>() == fr) {
                                                return detail::fmt_interval(e);
                                            }
                                        }
                                        return std::string("-");
                                    });
            }
        }
    } else if (cmd == "analytic") {
        os << "point recall = " << detail::fmt2(cfg.at("recall")) << ", precision = " << detail::fmt2(cfg.at("precision"))
           << "\n\n";
        for (const char* metric : {"prevalence_final", "fix_rate_actual", "fn_ratio", "tpr_final", "far_final"}) {
            detail::render_grid(os, metric, prevalences, fix_rates, [&](double pr, double fr) {
                for (const auto& cell : res.at("cells")) {
                    if (cell.at("prevalence").get<double>() == pr && cell.at("fix_rate").get<double>() == fr) {
                        return detail::fmt2(cell.at(metric));
                    }
                }
                return std::string("-");
            });
        }
        if (!res.at("cells").empty() && res.at("cells")[0].contains("pbox_extremes")) {
            for (const char* metric : {"prevalence_final", "fix_rate_actual", "fn_ratio"}) {
                detail::render_grid(os, std::string(metric) + " over p-box (extremes)", prevalences, fix_rates,
                                    [&](double pr, double fr) {
                                        for (const auto& cell : res.at("cells")) {
                                            if (cell.at("prevalence").get<double>() == pr &&
                                                cell.at("fix_rate").get<double>() == fr) {
                                                return detail::fmt_interval(cell.at("pbox_extremes").at(metric));
                                            }
                                        }
                                        return std::string("-");
                                    });
            }
        }
    } else if (cmd == "evidence") {
        for (const char* metric : {"recall", "precision"}) {
            const auto& m = res.at(metric);
            if (m.is_null()) {
                os << metric << ": no samples\n";
                continue;
            }
            const auto& s = m.at("stats");
            os << metric << ": samples " << s.at("count") << ", publications " << s.at("publications") << ", min "
               << detail::fmt2(s.at("min")) << ", max " << detail::fmt2(s.at("max")) << ", mean "
               << detail::fmt2(s.at("mean")) << '\n';
        }
        if (!res.at("recall").is_null()) {
            const auto& pb = res.at("recall").at("pbox");
            os << "recall p-box (min, max, mean) = (" << pb.at("min").dump() << ", " << pb.at("max").dump() << ", "
               << pb.at("mean").dump() << ")\n";
        }
        os << "outlier policy " << res.at("outlier_policy").get<std::string>() << ", removed "
           << res.at("removed").size() << '\n';
        for (const auto& r : res.at("removed")) {
            os << "  " << r.at("source_id").get<std::string>() << ',' << r.at("metric").get<std::string>() << ','
               << r.at("value").dump() << '\n';
        }
    } else if (cmd == "case-study") {
        if (res.at("which") == "rule-based") {
            os << detail::pad("Tool", 12) << detail::pad("Repaired", 12) << detail::pad("CR(%)", 9)
               << detail::pad("Lower(%)", 10) << "Upper(%)\n";
            char buf[128];
            for (const auto& r : res.at("tools")) {
                std::snprintf(buf, sizeof buf, "%-12s%-12s%-9.1f%-10.2f%.2f\n", r.at("name").get<std::string>().c_str(),
                              (std::to_string(r.at("correct").get<std::int64_t>()) + " (" +
                               std::to_string(r.at("generated").get<std::int64_t>()) + ")")
                                  .c_str(),
                              100.0 * r.at("point").get<double>(), 100.0 * r.at("lo").get<double>(),
                              100.0 * r.at("hi").get<double>());
                os << buf;
            }
            os << res.at("method").get<std::string>() << " interval, confidence " << detail::fmt2(res.at("confidence"))
               << '\n';
        } else {
            const auto& p = res.at("point");
            os << "samples " << cfg.at("n_items") << " -> detected " << p.at("detected") << " -> fixed "
               << p.at("fixed") << " -> unfixed " << p.at("residual") << '\n';
            os << "point fix rate " << detail::fmt2(res.at("point_fix_rate")) << ", maximum "
               << detail::fmt2(res.at("max_fix_rate")) << '\n';
            for (const auto& e : res.at("fix_rate")) {
                os << "fix rate (" << e.at("mode").get<std::string>() << ") " << detail::fmt_interval(e) << '\n';
            }
            for (const auto& n : res.at("notes")) {
                os << "note: " << n.get<std::string>() << '\n';
            }
        }
    } else if (cmd == "pbox-sample") {
        os << "threshold " << res.at("threshold").dump() << ", mean optimistic "
           << detail::fmt2(res.at("mean_optimistic")) << " (expected " << detail::fmt2(res.at("expected_optimistic"))
           << "), mean pessimistic " << detail::fmt2(res.at("mean_pessimistic")) << " (expected "
           << detail::fmt2(res.at("expected_pessimistic")) << ")\n";
        os << detail::pad("p", 22) << detail::pad("optimistic", 22) << "pessimistic\n";
        for (std::size_t i = 0; i < res.at("p").size(); ++i) {
            os << detail::pad(res.at("p")[i].dump(), 22) << detail::pad(res.at("optimistic")[i].dump(), 22)
               << res.at("pessimistic")[i].dump() << '\n';
        }
    }
    return os.str();
}

/// Flat CSV rendering with full precision.
inline std::string render_csv(const json& env)
{
    std::ostringstream os;
    const auto& res = env.at("results");
    const std::string cmd = env.at("config").at("command").get<std::string>();
    using detail::csv_num;
    if (cmd == "simulate") {
        os << "metric,mode,prevalence,fix_rate,lo,hi,undefined_trials\n";
        for (const char* metric : {"final_prevalence", "real_fix_rate", "fn_ratio"}) {
            for (const auto& e : res.at(metric)) {
                os << metric << ',' << e.at("mode").get<std::string>() << ',' << csv_num(e.at("prevalence")) << ','
                   << csv_num(e.at("fix_rate")) << ',' << csv_num(e.at("lo")) << ',' << csv_num(e.at("hi")) << ','
                   << e.at("undefined_trials") << '\n';
            }
        }
    } else if (cmd == "analytic") {
        const std::vector<const char*> cols{"prevalence", "fix_rate",  "recall",   "fix_rate_actual",
                                            "prevalence_final", "tpr_final", "far_final", "fn_final",
                                            "fn_ratio",   "tp_final",  "fp_final", "fixer_load"};
        for (std::size_t i = 0; i < cols.size(); ++i) {
            os << (i ? "," : "") << cols[i];
        }
        os << '\n';
        for (const auto& cell : res.at("cells")) {
            for (std::size_t i = 0; i < cols.size(); ++i) {
                os << (i ? "," : "") << csv_num(cell.at(cols[i]));
            }
            os << '\n';
        }
    } else if (cmd == "evidence") {
        os << "metric,count,publications,min,max,mean\n";
        for (const char* metric : {"recall", "precision"}) {
            if (res.at(metric).is_null()) {
                continue;
            }
            const auto& s = res.at(metric).at("stats");
            os << metric << ',' << s.at("count") << ',' << s.at("publications") << ',' << csv_num(s.at("min")) << ','
               << csv_num(s.at("max")) << ',' << csv_num(s.at("mean")) << '\n';
        }
    } else if (cmd == "case-study") {
        if (res.at("which") == "rule-based") {
            os << "name,correct,generated,point,lo,hi\n";
            for (const auto& r : res.at("tools")) {
                os << r.at("name").get<std::string>() << ',' << r.at("correct") << ',' << r.at("generated") << ','
                   << csv_num(r.at("point")) << ',' << csv_num(r.at("lo")) << ',' << csv_num(r.at("hi")) << '\n';
            }
        } else {
            os << "quantity,value\n";
            const auto& p = res.at("point");
            os << "detected," << p.at("detected") << "\nfixed," << p.at("fixed") << "\nresidual," << p.at("residual")
               << "\npoint_fix_rate," << csv_num(res.at("point_fix_rate")) << "\nmax_fix_rate,"
               << csv_num(res.at("max_fix_rate")) << '\n';
            for (const auto& e : res.at("fix_rate")) {
                const auto m = e.at("mode").get<std::string>();
                os << "fix_rate_lo_" << m << ',' << csv_num(e.at("lo")) << "\nfix_rate_hi_" << m << ','
                   << csv_num(e.at("hi")) << '\n';
            }
        }
    } else if (cmd == "pbox-sample") {
        os << "p,optimistic,pessimistic\n";
        for (std::size_t i = 0; i < res.at("p").size(); ++i) {
            os << csv_num(res.at("p")[i]) << ',' << csv_num(res.at("optimistic")[i]) << ','
               << csv_num(res.at("pessimistic")[i]) << '\n';
        }
    }
    return os.str();
}

inline std::string render(const json& env, OutputFormat fmt)
{
    switch (fmt) {
    case OutputFormat::json:
        return env.dump(2) + "\n";
    case OutputFormat::csv:
        return render_csv(env);
    case OutputFormat::table:
        break;
    }
    return render_table(env);
}

/// Process exit code for an exception escaping a command: 2 for
/// configuration and validation problems, 3 for I/O, 4 for broken
/// invariants and anything unexpected.
inline int exit_code_for(const std::exception& e) noexcept
{
    if (dynamic_cast<const io_error*>(&e)) {
        return 3;
    }
    if (dynamic_cast<const invariant_violation*>(&e)) {
        return 4;
    }
    if (dynamic_cast<const error*>(&e)) {
        return 2;
    }
    return 4;
}

} // namespace pipeunc

#endif
