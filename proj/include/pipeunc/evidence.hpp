#ifndef PIPEUNC_EVIDENCE_HPP
#define PIPEUNC_EVIDENCE_HPP

// Recall / precision figures harvested from publications, and the p-box
// they induce.
//
// CSV schema (UTF-8, header required, '#' starts a comment line):
//
//   source_id,metric,value
//   p1,recall,0.74
//   p1,precision,0.81

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pipeunc/error.hpp"
#include "pipeunc/pbox.hpp"

namespace pipeunc
{

enum class Metric { recall, precision };

constexpr std::string_view to_string(Metric m) noexcept
{
    return m == Metric::recall ? "recall" : "precision";
}

struct EvidenceSample {
    std::string source_id;
    Metric metric = Metric::recall;
    double value = 0.0;

    friend bool operator==(const EvidenceSample&, const EvidenceSample&) = default;
};

struct SummaryStats {
    std::size_t count = 0;
    std::size_t publications = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;

    friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

// Post-filter corpus statistics shipped as defaults (the raw corpus is not
// available).
inline constexpr SummaryStats default_recall_stats{2328, 115, 0.07, 1.00, 0.74};
inline constexpr SummaryStats default_precision_stats{2043, 100, 0.00, 1.00, 0.71};

namespace detail
{

inline std::string_view trim(std::string_view s) noexcept
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view s, double& out)
{
    if (s.empty()) {
        return false;
    }
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Skips blank and comment lines. Returns false at end of input.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no)
{
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        return true;
    }
    return false;
}

} // namespace detail

/// Parses the evidence CSV. Malformed rows throw parse_error and values
/// outside [0, 1] throw validation_error, both carrying the line number.
inline std::vector<EvidenceSample> load_samples(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_content_line(in, line, line_no)) {
        throw parse_error(line_no + 1, "missing header 'source_id,metric,value'");
    }
    const auto header = detail::split_csv(line);
    if (header.size() != 3 || header[0] != "source_id" || header[1] != "metric" || header[2] != "value") {
        throw parse_error(line_no, "expected header 'source_id,metric,value'");
    }

    std::vector<EvidenceSample> samples;
    while (detail::next_content_line(in, line, line_no)) {
        const auto f = detail::split_csv(line);
        if (f.size() != 3) {
            throw parse_error(line_no, "expected 3 fields, got " + std::to_string(f.size()));
        }
        EvidenceSample s;
        s.source_id = std::string(f[0]);
        if (s.source_id.empty()) {
            throw parse_error(line_no, "empty source_id");
        }
        if (f[1] == "recall") {
            s.metric = Metric::recall;
        } else if (f[1] == "precision") {
            s.metric = Metric::precision;
        } else {
            throw parse_error(line_no, "unknown metric '" + std::string(f[1]) + "'");
        }
        if (!detail::parse_double(f[2], s.value)) {
            throw parse_error(line_no, "not a number: '" + std::string(f[2]) + "'");
        }
        if (s.value < 0.0 || s.value > 1.0) {
            throw validation_error(line_no, "value " + std::string(f[2]) + " outside [0, 1]");
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

inline std::vector<EvidenceSample> load_samples_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open evidence file '" + path + "'");
    }
    return load_samples(in);
}

// Writes values in shortest round-trip form, so reloading is lossless.
inline void write_samples(std::ostream& out, const std::vector<EvidenceSample>& samples)
{
    out << "source_id,metric,value\n";
    char buf[32];
    for (const auto& s : samples) {
        const auto res = std::to_chars(buf, buf + sizeof buf, s.value);
        out << s.source_id << ',' << to_string(s.metric) << ',' << std::string_view(buf, res.ptr - buf) << '\n';
    }
}

inline std::vector<EvidenceSample> filter_metric(const std::vector<EvidenceSample>& samples, Metric m)
{
    std::vector<EvidenceSample> out;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
                 [m](const EvidenceSample& s) { return s.metric == m; });
    return out;
}

struct OutlierPolicy {
    enum class Kind { none, iqr } kind = Kind::iqr;
    double k = 1.5;

    static OutlierPolicy none() { return {Kind::none, 0.0}; }
    static OutlierPolicy iqr(double k = 1.5) { return {Kind::iqr, k}; }
};

struct OutlierSplit {
    std::vector<EvidenceSample> kept;
    std::vector<EvidenceSample> removed;
};

/// Linear-interpolation quantile of sorted data (the "type 7" rule used by
/// R and NumPy by default).
inline double quantile_sorted(const std::vector<double>& sorted, double q)
{
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// One pass of Tukey fences per metric: drops values outside
/// [Q1 - k*IQR, Q3 + k*IQR]. Order within each partition is preserved.
inline OutlierSplit remove_outliers(const std::vector<EvidenceSample>& samples, OutlierPolicy policy)
{
    OutlierSplit split;
    if (policy.kind == OutlierPolicy::Kind::none) {
        split.kept = samples;
        return split;
    }
    if (policy.k < 0.0) {
        throw invalid_parameter("IQR multiplier must be nonnegative");
    }

    struct Fence {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
    };
    auto fence_for = [&](Metric m) {
        std::vector<double> v;
        for (const auto& s : samples) {
            if (s.metric == m) {
                v.push_back(s.value);
            }
        }
        if (v.empty()) {
            return Fence{};
        }
        std::sort(v.begin(), v.end());
        const double q1 = quantile_sorted(v, 0.25);
        const double q3 = quantile_sorted(v, 0.75);
        const double iqr = q3 - q1;
        return Fence{q1 - policy.k * iqr, q3 + policy.k * iqr};
    };
    const Fence recall_fence = fence_for(Metric::recall);
    const Fence precision_fence = fence_for(Metric::precision);

    for (const auto& s : samples) {
        const Fence& f = s.metric == Metric::recall ? recall_fence : precision_fence;
        (s.value < f.lo || s.value > f.hi ? split.removed : split.kept).push_back(s);
    }
    return split;
}

/// Count, distinct publications, min, max and arithmetic mean. The mean is
/// a left-to-right sum divided by the count.
inline SummaryStats summarize(const std::vector<EvidenceSample>& samples)
{
    if (samples.empty()) {
        throw empty_evidence("no samples to summarize");
    }
    SummaryStats st;
    st.count = samples.size();
    st.min = samples.front().value;
    st.max = samples.front().value;
    double sum = 0.0;
    std::set<std::string_view> sources;
    for (const auto& s : samples) {
        st.min = std::min(st.min, s.value);
        st.max = std::max(st.max, s.value);
        sum += s.value;
        sources.insert(s.source_id);
    }
    st.publications = sources.size();
    st.mean = std::clamp(sum / static_cast<double>(st.count), st.min, st.max);
    return st;
}

inline PBoxParams to_pbox(const SummaryStats& stats)
{
    if (!(stats.min <= stats.mean && stats.mean <= stats.max)) {
        throw invalid_stats("summary statistics violate min <= mean <= max");
    }
    PBoxParams box{stats.min, stats.max, stats.mean};
    validate(box);
    return box;
}

} // namespace pipeunc

#endif
