#pragma once

// Uniformly sampled RSSI streams and the trace CSV format.
//
//   time_s,ap_id,rssi_dbm
//   0.0000,AP1,-40.0000
//
// Rows may interleave APs but must be non-decreasing in time per AP. Times are
// snapped to the uniform grid start + i / rate; jitter above 1% of the sample
// period is rejected.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wigest/error.hpp"

namespace wigest {

inline constexpr double kDefaultSampleRateHz = 50.0;
inline constexpr double kMinPlausibleRssiDbm = -120.0;
inline constexpr double kMaxPlausibleRssiDbm = 0.0;

struct RssiTrace {
    std::string ap_id;
    double sample_rate_hz = kDefaultSampleRateHz;
    double start_time_s = 0.0;
    std::vector<double> samples;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    double period_s() const noexcept { return 1.0 / sample_rate_hz; }

    // Computed from the index, never accumulated.
    double time_at(std::size_t i) const noexcept {
        return start_time_s + static_cast<double>(i) / sample_rate_hz;
    }
    double end_time_s() const noexcept { return empty() ? start_time_s : time_at(size() - 1); }
    double duration_s() const noexcept { return static_cast<double>(size()) / sample_rate_hz; }

    // Nearest sample index for an absolute time, clamped to [0, size()].
    std::size_t index_at(double t) const noexcept {
        const double raw = std::round((t - start_time_s) * sample_rate_hz);
        if (raw <= 0.0) return 0;
        return std::min(size(), static_cast<std::size_t>(raw));
    }

    double mean() const {
        if (empty()) return 0.0;
        return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(size());
    }

    // Copy of samples [first, last) with the start time shifted accordingly.
    RssiTrace slice(std::size_t first, std::size_t last) const {
        first = std::min(first, size());
        last = std::clamp(last, first, size());
        RssiTrace out{ap_id, sample_rate_hz, time_at(first), {}};
        out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(first),
                           samples.begin() + static_cast<std::ptrdiff_t>(last));
        return out;
    }
};

inline void validate_trace(const RssiTrace& trace) {
    if (!(trace.sample_rate_hz > 0.0) || !std::isfinite(trace.sample_rate_hz))
        fail(ErrorKind::Domain, "sample rate must be positive");
    if (trace.empty()) fail(ErrorKind::EmptyInput, "trace '" + trace.ap_id + "' has no samples");
    for (double v : trace.samples)
        if (!std::isfinite(v)) fail(ErrorKind::Domain, "trace '" + trace.ap_id + "' has a non-finite sample");
}

// One trace per overheard AP on a common clock.
class TraceBundle {
public:
    TraceBundle() = default;

    explicit TraceBundle(std::vector<RssiTrace> traces) : traces_(std::move(traces)) {
        for (std::size_t i = 1; i < traces_.size(); ++i) {
            if (std::abs(traces_[i].sample_rate_hz - traces_[0].sample_rate_hz) > 1e-9 * traces_[0].sample_rate_hz)
                fail(ErrorKind::Format, "traces in a bundle must share one sample rate");
        }
        means_.reserve(traces_.size());
        for (const auto& t : traces_) means_.push_back(t.mean());
    }

    const std::vector<RssiTrace>& traces() const noexcept { return traces_; }
    std::size_t size() const noexcept { return traces_.size(); }
    bool empty() const noexcept { return traces_.empty(); }
    const RssiTrace& operator[](std::size_t i) const { return traces_.at(i); }

    double mean_rssi(std::size_t i) const { return means_.at(i); }
    const std::vector<double>& mean_rssi() const noexcept { return means_; }

    std::size_t strongest() const {
        if (empty()) fail(ErrorKind::EmptyInput, "bundle has no traces");
        return static_cast<std::size_t>(std::max_element(means_.begin(), means_.end()) - means_.begin());
    }

    double sample_rate_hz() const { return empty() ? kDefaultSampleRateHz : traces_.front().sample_rate_hz; }

private:
    std::vector<RssiTrace> traces_;
    std::vector<double> means_;
};

namespace detail {

inline std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    // "-0.0000" reads back the same, but keep the file canonical.
    if (std::string_view(buf) == "-0.0000") return "0.0000";
    return buf;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::string s(token);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

struct RawSeries {
    std::vector<double> times;
    std::vector<double> values;
};

}  // namespace detail

struct LoadOptions {
    // When unset the rate is inferred from each AP's first and last timestamps.
    std::optional<double> sample_rate_hz;
    double jitter_fraction = 0.01;
};

// Builds an aligned bundle from per-AP (time, value) rows; used by the CSV reader.
inline TraceBundle align_series(const std::map<std::string, detail::RawSeries>& series, const LoadOptions& options) {
    if (series.empty()) fail(ErrorKind::EmptyInput, "trace file has no samples");

    std::vector<RssiTrace> traces;
    for (const auto& [ap, raw] : series) {
        const std::size_t n = raw.times.size();
        double rate = options.sample_rate_hz.value_or(kDefaultSampleRateHz);
        if (!options.sample_rate_hz && n >= 2) {
            const double span = raw.times.back() - raw.times.front();
            if (!(span > 0.0)) fail(ErrorKind::Format, "AP '" + ap + "' has zero time span");
            rate = std::round(static_cast<double>(n - 1) / span * 1000.0) / 1000.0;
        }
        if (!(rate > 0.0)) fail(ErrorKind::Format, "non-positive sample rate");
        const double period = 1.0 / rate;
        const double t0 = raw.times.front();
        for (std::size_t i = 0; i < n; ++i) {
            const double expected = t0 + static_cast<double>(i) * period;
            if (std::abs(raw.times[i] - expected) > options.jitter_fraction * period + 1e-9)
                fail(ErrorKind::Format, "AP '" + ap + "' sample " + std::to_string(i) +
                                            " deviates from the uniform grid by more than the jitter tolerance");
        }
        traces.push_back(RssiTrace{ap, rate, t0, raw.values});
    }

    for (const auto& t : traces)
        if (std::abs(t.sample_rate_hz - traces.front().sample_rate_hz) > 1e-9)
            fail(ErrorKind::Format, "APs disagree on sample rate");

    // Truncate to the common time intersection.
    const double rate = traces.front().sample_rate_hz;
    double common_start = -std::numeric_limits<double>::infinity();
    double common_end = std::numeric_limits<double>::infinity();
    for (const auto& t : traces) {
        common_start = std::max(common_start, t.start_time_s);
        common_end = std::min(common_end, t.end_time_s());
    }
    if (common_end < common_start - 1e-9) fail(ErrorKind::Format, "AP time ranges do not overlap");

    const auto count = static_cast<std::size_t>(std::floor((common_end - common_start) * rate + 0.5)) + 1;
    for (auto& t : traces) {
        const double offset_exact = (common_start - t.start_time_s) * rate;
        const double offset = std::round(offset_exact);
        if (std::abs(offset - offset_exact) > options.jitter_fraction + 1e-6)
            fail(ErrorKind::Format, "AP '" + t.ap_id + "' is not on the common sample grid");
        const auto first = static_cast<std::size_t>(offset);
        t = t.slice(first, first + count);
        t.start_time_s = common_start;
    }
    return TraceBundle(std::move(traces));
}

inline TraceBundle read_trace_csv(std::istream& in, const LoadOptions& options = {}) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::map<std::string, detail::RawSeries> series;

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (text == "time_s,ap_id,rssi_dbm") continue;
            fail(ErrorKind::Parse, "line 1: expected header 'time_s,ap_id,rssi_dbm'");
        }
        const auto fields = detail::split(text, ',');
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (fields.size() != 3) fail(ErrorKind::Parse, where + "expected 3 fields");
        const auto t = detail::parse_double(fields[0]);
        const auto v = detail::parse_double(fields[2]);
        if (!t) fail(ErrorKind::Parse, where + "bad time_s '" + std::string(fields[0]) + "'");
        if (fields[1].empty()) fail(ErrorKind::Parse, where + "empty ap_id");
        if (!v) fail(ErrorKind::Parse, where + "bad rssi_dbm '" + std::string(fields[2]) + "'");
        if (*v < kMinPlausibleRssiDbm || *v > kMaxPlausibleRssiDbm)
            fail(ErrorKind::Parse, where + "rssi_dbm outside [-120, 0]");

        auto& s = series[std::string(fields[1])];
        if (!s.times.empty() && *t < s.times.back())
            fail(ErrorKind::Format, where + "time decreases for AP '" + std::string(fields[1]) + "'");
        s.times.push_back(*t);
        s.values.push_back(*v);
    }
    if (series.empty()) fail(ErrorKind::EmptyInput, "trace file has no samples");
    return align_series(series, options);
}

inline TraceBundle load_trace(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    return read_trace_csv(in, options);
}

inline void write_trace_csv(std::ostream& out, const TraceBundle& bundle) {
    out << "time_s,ap_id,rssi_dbm\n";
    std::size_t longest = 0;
    for (const auto& t : bundle.traces()) longest = std::max(longest, t.size());
    // Interleave by sample index so the file reads in time order.
    for (std::size_t i = 0; i < longest; ++i) {
        for (const auto& t : bundle.traces()) {
            if (i >= t.size()) continue;
            out << detail::fixed4(t.time_at(i)) << ',' << t.ap_id << ',' << detail::fixed4(t.samples[i]) << '\n';
        }
    }
}

inline void save_trace(const TraceBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    write_trace_csv(out, bundle);
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace wigest
