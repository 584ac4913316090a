#pragma once

// Rising edges, falling edges and pauses from a denoised RSSI trace.
//
// Edges are located on the Haar detail response at the analysis level: a rise
// drives the response negative, a fall positive. Each response peak is then
// refined on the trace itself: the plateaus on either side give the amplitude,
// and the 10%-90% crossing times give the duration (a sigmoid edge spends about
// half its full transition between those two crossings).

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "wigest/denoiser.hpp"
#include "wigest/error.hpp"
#include "wigest/trace.hpp"
#include "wigest/types.hpp"
#include "wigest/wavelet.hpp"

namespace wigest {

struct ExtractorConfig {
    int analysis_level = 5;       // fallback when dynamic selection finds no motion
    bool dynamic_level = true;    // pick the level of interest from the scalogram
    int max_level = 7;
    double peak_prominence_factor = 2.0;
    // Noise sigma of the raw (pre-denoising) trace. Estimated from the trace
    // itself when unset, which underestimates it on already-denoised input.
    std::optional<double> noise_sigma_db;
    double min_edge_db = 1.0;
    double min_edge_z = 4.0;      // fitted amplitude over its standard error
    double pause_variance_db2 = 1.0;
    double pause_min_s = kMinPauseS;
    double magnitude_fraction = 0.7;
    double edge_search_s = 3.0;   // furthest a plateau is searched from an edge centre
    double merge_gap_s = 0.1;     // same-sign edges closer than this are one transition
};

inline void validate_config(const ExtractorConfig& c) {
    if (c.analysis_level < 1 || c.max_level < 1) fail(ErrorKind::Domain, "analysis levels must be >= 1");
    if (!(c.peak_prominence_factor > 0.0) || !(c.pause_variance_db2 > 0.0) || !(c.pause_min_s > 0.0) ||
        !(c.magnitude_fraction > 0.0) || !(c.edge_search_s > 0.0) || !(c.min_edge_db >= 0.0) ||
        !(c.min_edge_z >= 0.0) || !(c.merge_gap_s >= 0.0))
        fail(ErrorKind::Domain, "extractor thresholds must be positive");
}

// --- level of interest ------------------------------------------------------

struct Scalogram {
    // power[l-1][w]: squared detail response of window w (2^l samples, hop 2^(l-1))
    // divided by sqrt(2^l). Dividing by the full window length lets blocky
    // shrinkage artefacts at level 1 compete with real edges; no division makes
    // every isolated edge pick the coarsest level.
    std::vector<std::vector<double>> power;
    std::vector<double> local_max_energy;  // per level

    int levels() const noexcept { return static_cast<int>(power.size()); }
    // Centre sample of window w at level l.
    static double centre(int level, std::size_t w) noexcept {
        const double hop = std::ldexp(1.0, level - 1);
        return static_cast<double>(w) * hop + hop;
    }
};

// Cells whose response magnitude is under `gate` count as empty, so broadband
// noise (which is spread evenly over the levels but has many more fine-level
// maxima) cannot outvote a real motion.
inline Scalogram build_scalogram(std::span<const double> samples, int max_level, double gate = 0.0) {
    Scalogram s;
    for (int l = 1; l <= max_level; ++l) {
        const auto response = stationary_detail(samples, l);
        const std::size_t hop = std::size_t{1} << (l - 1);
        const double width = std::ldexp(1.0, l);
        std::vector<double> row;
        for (std::size_t n = 0; n < response.size(); n += hop)
            row.push_back(std::abs(response[n]) < gate ? 0.0 : response[n] * response[n] / std::sqrt(width));
        s.power.push_back(std::move(row));
    }

    // 2-D local maxima: a cell must dominate its time neighbours and the
    // time-nearest cells (and their neighbours) one level up and down.
    const auto at = [&](int level, double centre_sample, long offset) -> std::optional<double> {
        if (level < 1 || level > s.levels()) return std::nullopt;
        const auto& row = s.power[static_cast<std::size_t>(level - 1)];
        if (row.empty()) return std::nullopt;
        const double hop = std::ldexp(1.0, level - 1);
        const long w = std::lround(centre_sample / hop - 1.0) + offset;
        if (w < 0 || w >= static_cast<long>(row.size())) return std::nullopt;
        return row[static_cast<std::size_t>(w)];
    };
    s.local_max_energy.assign(static_cast<std::size_t>(s.levels()), 0.0);
    for (int l = 1; l <= s.levels(); ++l) {
        const auto& row = s.power[static_cast<std::size_t>(l - 1)];
        for (std::size_t w = 0; w < row.size(); ++w) {
            const double p = row[w];
            if (p <= 0.0) continue;
            const double c = Scalogram::centre(l, w);
            bool is_max = true;
            for (int dl = -1; dl <= 1 && is_max; ++dl)
                for (long dw = -1; dw <= 1 && is_max; ++dw) {
                    if (dl == 0 && dw == 0) continue;
                    if (const auto q = at(l + dl, c, dw); q && *q > p) is_max = false;
                }
            if (is_max) s.local_max_energy[static_cast<std::size_t>(l - 1)] += p;
        }
    }
    return s;
}

struct LevelSelection {
    int level = 5;
    bool no_motion = false;
};

// Level whose 2-D local maxima carry the most energy; ties go to the finer level.
inline LevelSelection select_analysis_level(std::span<const double> samples, int max_level, int fallback_level = 5,
                                            double gate = 0.0) {
    if (max_level < 1) fail(ErrorKind::Domain, "max_level must be >= 1");
    if (max_level >= 63 || (std::size_t{1} << max_level) > samples.size())
        fail(ErrorKind::Domain, "trace too short for level " + std::to_string(max_level));
    const auto scalogram = build_scalogram(samples, max_level, gate);
    const auto& energy = scalogram.local_max_energy;
    const auto best = std::max_element(energy.begin(), energy.end());  // first maximum = finest
    const double total = std::accumulate(energy.begin(), energy.end(), 0.0);
    if (total <= 1e-18) return {fallback_level, true};
    return {static_cast<int>(best - energy.begin()) + 1, false};
}

inline LevelSelection select_analysis_level(const RssiTrace& trace, int max_level, int fallback_level = 5,
                                            double gate = 0.0) {
    validate_trace(trace);
    return select_analysis_level(trace.samples, max_level, fallback_level, gate);
}

// --- edges ------------------------------------------------------------------

namespace extract_detail {

struct Peak {
    std::size_t centre = 0;  // sample index of the half-window boundary
    double value = 0.0;      // signed response
};

// One extremum per run of same-signed response above the gate. Runs of the same
// sign separated by less than `merge_gap` samples are treated as one edge, since
// noise riding on a slow ramp can briefly pull the response under the gate.
inline std::vector<Peak> find_peaks(const std::vector<double>& response, std::size_t half, double gate,
                                    std::size_t merge_gap) {
    std::vector<Peak> peaks;
    std::vector<std::size_t> run_end;  // one past the last above-gate sample of each peak's run
    std::size_t i = 0;
    while (i < response.size()) {
        if (std::abs(response[i]) < gate || response[i] == 0.0) {
            ++i;
            continue;
        }
        const bool negative = response[i] < 0.0;
        std::size_t j = i;
        std::size_t best = i;
        while (j < response.size() && std::abs(response[j]) >= gate && (response[j] < 0.0) == negative) {
            if (std::abs(response[j]) > std::abs(response[best])) best = j;
            ++j;
        }
        const bool merge = !peaks.empty() && (peaks.back().value < 0.0) == negative && i - run_end.back() < merge_gap;
        if (merge) {
            if (std::abs(response[best]) > std::abs(peaks.back().value)) peaks.back() = {best + half, response[best]};
            run_end.back() = j;
        } else {
            peaks.push_back({best + half, response[best]});
            run_end.push_back(j);
        }
        i = j;
    }
    return peaks;
}

inline double median_of(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    return median_inplace(v);
}

// Fractional index in (from, to] where x first reaches `level` walking from `from`
// towards `to` (either direction); returns `to` when never reached.
inline double crossing(std::span<const double> x, std::size_t from, std::size_t to, double level, bool upward) {
    const auto reached = [&](double v) { return upward ? v >= level : v <= level; };
    if (from == to) return static_cast<double>(from);
    const long step = to > from ? 1 : -1;
    for (long i = static_cast<long>(from); i != static_cast<long>(to); i += step) {
        const long next = i + step;
        const double a = x[static_cast<std::size_t>(i)];
        const double b = x[static_cast<std::size_t>(next)];
        if (reached(b)) {
            const double frac = (b == a) ? 1.0 : std::clamp((level - a) / (b - a), 0.0, 1.0);
            return static_cast<double>(i) + frac * static_cast<double>(step);
        }
    }
    return static_cast<double>(to);
}

// Normalised logistic ramp over +-4 scale units, tabulated: 0 below u = 0, 1 above u = 1.
inline double ramp_shape(double u) {
    constexpr int kSteps = 1024;
    static const auto table = [] {
        std::array<double, kSteps + 1> t{};
        const auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
        const double lo = logistic(-4.0), hi = logistic(4.0);
        for (int i = 0; i <= kSteps; ++i) t[i] = (logistic(4.0 * (2.0 * i / kSteps - 1.0)) - lo) / (hi - lo);
        return t;
    }();
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double pos = u * kSteps;
    const auto i = static_cast<int>(pos);
    return table[i] + (pos - i) * (table[i + 1] - table[i]);
}

struct RampFit {
    double centre = 0.0;    // fractional sample index
    double duration = 0.0;  // samples
    double from_level = 0.0;
    double to_level = 0.0;
};

// Least-squares logistic ramp over x[lo, hi]. Both plateau levels are solved in
// closed form for each candidate; centre and duration (ramp kept inside [lo, hi]) come
// from a grid search, coarse first, then a local pass at one-sample resolution.
inline RampFit fit_ramp(std::span<const double> x, std::size_t lo, std::size_t hi, double centre_guess,
                        double min_duration, double max_duration) {
    double xx = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) xx += x[i] * x[i];
    const auto solve = [&](double c, double d, RampFit& fit) {
        double aa = 0.0, ab = 0.0, bb = 0.0, xa = 0.0, xb = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            const double g = ramp_shape((static_cast<double>(i) - c) / d + 0.5);
            const double h = 1.0 - g;
            aa += h * h;
            ab += h * g;
            bb += g * g;
            xa += x[i] * h;
            xb += x[i] * g;
        }
        const double det = aa * bb - ab * ab;
        if (!(det > 1e-9 * aa * bb)) return std::numeric_limits<double>::infinity();
        const double s0 = (xa * bb - xb * ab) / det;
        const double s1 = (xb * aa - xa * ab) / det;
        fit = {c, d, s0, s1};
        return xx - 2.0 * (s0 * xa + s1 * xb) + s0 * s0 * aa + 2.0 * s0 * s1 * ab + s1 * s1 * bb;
    };
    constexpr int kDurations = 24;
    const double ratio = std::pow(max_duration / min_duration, 1.0 / (kDurations - 1));
    const double reach = std::max(4.0, 0.25 * static_cast<double>(hi - lo));
    RampFit best{centre_guess, min_duration, 0.0, 0.0};
    double best_err = std::numeric_limits<double>::infinity();
    const auto consider = [&](double c, double d) {
        if (c < static_cast<double>(lo) || c > static_cast<double>(hi)) return;
        // The ramp may not reach past either end of the range.
        if (d > 2.0 * std::min(c - static_cast<double>(lo), static_cast<double>(hi) - c) + 4.0) return;
        RampFit fit;
        const double e = solve(c, d, fit);
        if (e < best_err) {
            best_err = e;
            best = fit;
        }
    };
    for (int k = 0; k < kDurations; ++k)
        for (double c = centre_guess - reach; c <= centre_guess + reach; c += 4.0)
            consider(c, min_duration * std::pow(ratio, k));
    const RampFit coarse = best;
    const double fine = std::pow(ratio, 0.25);
    for (int k = -4; k <= 4; ++k)
        for (double dc = -4.0; dc <= 4.0; dc += 1.0) consider(coarse.centre + dc, coarse.duration * std::pow(fine, k));
    return best;
}

struct EdgeModel {
    bool rising = true;
    double centre = 0.0;    // samples
    double duration = 0.0;  // samples
    double amplitude = 0.0; // signed: positive for a rise
    std::size_t left = 0, right = 0;  // hard limits for the span
    bool cut = false;
    bool fitted = false;
    double z = 0.0;  // |amplitude| over its least-squares standard error
};

// Fits every edge of a trace as one sum of logistic ramps. Each edge is refitted
// against the residual left by its neighbours, with its own offset and height;
// the first sweep looks only halfway to the neighbours, later sweeps reach their
// centres. A refit that flips the edge's sign is rejected.
inline void fit_edges(std::vector<EdgeModel>& edges, std::span<const double> x, std::size_t search,
                      double min_duration, double max_duration, double sigma) {
    const std::size_t n = x.size();
    if (edges.empty() || n < 8) return;
    const int sweeps = edges.size() == 1 ? 1 : 3;
    std::vector<double> residual(n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (std::size_t k = 0; k < edges.size(); ++k) {
            auto& e = edges[k];
            double lo_d, hi_d;
            const double prev = k > 0 ? edges[k - 1].centre : -1.0;
            const double next = k + 1 < edges.size() ? edges[k + 1].centre : -1.0;
            if (sweep == 0) {
                lo_d = k > 0 ? 0.5 * (prev + e.centre) : e.centre - static_cast<double>(search);
                hi_d = k + 1 < edges.size() ? 0.5 * (e.centre + next) : e.centre + static_cast<double>(search);
            } else {
                lo_d = k > 0 ? prev : e.centre - static_cast<double>(search);
                hi_d = k + 1 < edges.size() ? next : e.centre + static_cast<double>(search);
            }
            const auto lo = static_cast<std::size_t>(std::clamp(std::ceil(lo_d), 0.0, static_cast<double>(n - 1)));
            const auto hi = static_cast<std::size_t>(std::clamp(std::floor(hi_d), 0.0, static_cast<double>(n - 1)));
            if (hi < lo + 4) continue;
            for (std::size_t i = lo; i <= hi; ++i) {
                double v = x[i];
                if (sweep > 0)
                    for (std::size_t j = 0; j < edges.size(); ++j)
                        if (j != k)
                            v -= edges[j].amplitude *
                                 ramp_shape((static_cast<double>(i) - edges[j].centre) / edges[j].duration + 0.5);
                residual[i] = v;
            }
            const auto fit = fit_ramp(residual, lo, hi, e.centre, min_duration, max_duration);
            const double amplitude = fit.to_level - fit.from_level;
            if (!std::isfinite(amplitude) || (amplitude > 0.0) != e.rising) continue;
            e.centre = fit.centre;
            e.duration = fit.duration;
            e.amplitude = amplitude;
            e.fitted = true;
            // With the ramp shape fixed, A is a slope against that regressor.
            double sum = 0.0, sum2 = 0.0;
            for (std::size_t i = lo; i <= hi; ++i) {
                const double r = ramp_shape((static_cast<double>(i) - e.centre) / e.duration + 0.5);
                sum += r;
                sum2 += r * r;
            }
            const double sxx = sum2 - sum * sum / static_cast<double>(hi - lo + 1);
            e.z = sigma > 0.0 ? std::abs(amplitude) * std::sqrt(std::max(sxx, 0.0)) / sigma
                              : std::numeric_limits<double>::infinity();
        }
    }
}

}  // namespace extract_detail

// Share of a logistic edge (evaluated over +-4 scale units) that lies between its
// `fraction` and 1 - `fraction` crossings.
inline double logistic_inner_share(double fraction) {
    constexpr double k = 4.0;
    const double lo = 1.0 / (1.0 + std::exp(k));
    const double hi = 1.0 - lo;
    const double l = lo + fraction * (hi - lo);
    const double u = (std::log(l / (1.0 - l)) / k + 1.0) / 2.0;
    return 1.0 - 2.0 * u;
}

inline double resolve_noise_sigma(std::span<const double> samples, const ExtractorConfig& config) {
    if (config.noise_sigma_db) return *config.noise_sigma_db;
    if (samples.size() < 16) return 0.0;
    const auto dec = dwt_decompose(samples, 1);
    return estimate_noise_sigma(dec.detail(1));
}

inline int resolve_level(std::span<const double> samples, const ExtractorConfig& config, int fallback_level) {
    const int deepest = std::min(config.max_level, max_dwt_levels(samples.size()));
    if (deepest < 1) return 0;
    if (!config.dynamic_level) return std::min(config.analysis_level, deepest);
    const double gate = config.peak_prominence_factor * resolve_noise_sigma(samples, config);
    return std::min(select_analysis_level(samples, deepest, fallback_level, gate).level, deepest);
}

// Edges found at an explicit level; exposed for diagnostics and tests.
// `raw`, when given, is the undenoised trace on the same time base; edge
// durations are fitted on it because shrinkage reshapes ramps into steps.
inline void check_raw_alignment(const RssiTrace& trace, const RssiTrace* raw) {
    if (raw && (raw->size() != trace.size() || raw->start_time_s != trace.start_time_s ||
                raw->sample_rate_hz != trace.sample_rate_hz))
        fail(ErrorKind::Domain, "raw trace is not aligned with the denoised trace");
}

inline std::vector<PrimitiveEvent> detect_edges_at_level(const RssiTrace& trace, const ExtractorConfig& config,
                                                         int level, const RssiTrace* raw = nullptr) {
    validate_config(config);
    check_raw_alignment(trace, raw);
    if (level < 1 || (std::size_t{1} << level) > trace.size()) return {};

    const auto response = stationary_detail(trace.samples, level);
    const std::span<const double> x(trace.samples);
    const std::size_t half = std::size_t{1} << (level - 1);
    const double gate = config.peak_prominence_factor * resolve_noise_sigma(x, config);
    // A gate of zero would turn rounding noise into edges.
    const double floor = 1e-9 * (1.0 + std::abs(trace.mean()));
    const auto peaks = extract_detail::find_peaks(response, half, std::max(gate, floor), half);
    // Still climbing at either end of the response: an edge cut off by the trace
    // boundary. It is fitted (its neighbours need it) but not reported.
    const auto cut = [&](const extract_detail::Peak& pk) {
        return pk.centre == half || pk.centre + 1 == half + response.size();
    };

    const std::size_t n = x.size();
    const auto search = static_cast<std::size_t>(std::llround(config.edge_search_s * trace.sample_rate_hz));
    const auto plateau = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.pause_min_s * trace.sample_rate_hz)));
    std::vector<extract_detail::EdgeModel> models;
    for (std::size_t p = 0; p < peaks.size(); ++p) {
        const std::size_t c = std::min(peaks[p].centre, n - 1);
        const bool rising = peaks[p].value < 0.0;
        const std::size_t left = p > 0 ? peaks[p - 1].centre : (c > search ? c - search : 0);
        const std::size_t right = p + 1 < peaks.size() ? std::min(peaks[p + 1].centre, n - 1) : std::min(n - 1, c + search);

        const auto before = x.subspan(left, c - left + 1);
        const auto after = x.subspan(c, right - c + 1);
        // First pass: extremes on either side. Noise pushes those outward, so the
        // plateaus are then re-measured as medians just outside the edge span.
        double start_level = rising ? *std::min_element(before.begin(), before.end())
                                    : *std::max_element(before.begin(), before.end());
        double end_level = rising ? *std::max_element(after.begin(), after.end())
                                  : *std::min_element(after.begin(), after.end());
        double start = static_cast<double>(c), end = static_cast<double>(c);
        bool usable = true;
        for (int pass = 0; pass < 3 && usable; ++pass) {
            const double amplitude = (end_level - start_level) * (rising ? 1.0 : -1.0);
            // Only the extremes pass decides; medians beside back-to-back ramps
            // land on the neighbours and would shrink a real edge to nothing.
            if (pass == 0 && (amplitude < config.min_edge_db || amplitude <= 0.0)) {
                usable = false;
                break;
            }
            if (amplitude <= 0.0) break;
            const auto level_at = [&](double fraction) {
                return start_level + (rising ? 1.0 : -1.0) * fraction * amplitude;
            };
            // Anchor on the half-way crossing nearest to the response peak.
            const bool above = rising ? x[c] >= level_at(0.5) : x[c] <= level_at(0.5);
            const double anchor = above ? extract_detail::crossing(x, c, left, level_at(0.5), !rising)
                                        : extract_detail::crossing(x, c, right, level_at(0.5), rising);
            const auto a = static_cast<std::size_t>(
                std::clamp(std::lround(anchor), static_cast<long>(left), static_cast<long>(right)));
            constexpr double q = 0.1;
            const double t10 = extract_detail::crossing(x, a, left, level_at(q), !rising);
            const double t90 = extract_detail::crossing(x, a, right, level_at(1.0 - q), rising);
            const double mid = 0.5 * (t10 + t90);
            const double full = std::max(t90 - t10, 1.0) / logistic_inner_share(q);
            start = std::max(static_cast<double>(left), mid - 0.5 * full);
            end = std::min(static_cast<double>(right), mid + 0.5 * full);
            if (pass == 2) break;

            const auto s0 = static_cast<std::size_t>(std::floor(start));
            const auto e0 = static_cast<std::size_t>(std::ceil(end));
            const auto lo = s0 > left + plateau ? s0 - plateau : left;
            const auto hi = std::min(right, e0 + plateau);
            if (s0 > lo) start_level = extract_detail::median_of(x.subspan(lo, s0 - lo + 1));
            if (hi > e0) end_level = extract_detail::median_of(x.subspan(e0, hi - e0 + 1));
        }
        if (!usable) continue;
        const double seed_amplitude = std::max(std::abs(end_level - start_level), config.min_edge_db);
        models.push_back({rising, 0.5 * (start + end), std::max(end - start, 1.0),
                          rising ? seed_amplitude : -seed_amplitude, left, right, cut(peaks[p])});
    }

    const double fs = trace.sample_rate_hz;
    extract_detail::fit_edges(models, raw ? std::span<const double>(raw->samples) : x, search,
                              std::max(2.0, 0.1 * fs), 5.0 * fs, resolve_noise_sigma(x, config));
    std::vector<PrimitiveEvent> edges;
    for (const auto& m : models) {
        if (m.cut || !m.fitted || std::abs(m.amplitude) < config.min_edge_db || m.z < config.min_edge_z) continue;
        const double start = std::max(static_cast<double>(m.left), m.centre - 0.5 * m.duration);
        const double end = std::min(static_cast<double>(m.right), m.centre + 0.5 * m.duration);
        PrimitiveEvent e;
        e.kind = m.rising ? PrimitiveKind::RisingEdge : PrimitiveKind::FallingEdge;
        e.start_s = trace.start_time_s + start / fs;
        e.end_s = trace.start_time_s + end / fs;
        e.amplitude_db = std::abs(m.amplitude);
        // A fine level can split one ramp into two abutting fits of the same sign.
        if (!edges.empty() && edges.back().kind == e.kind && e.start_s - edges.back().end_s <= config.merge_gap_s) {
            auto& prev = edges.back();
            prev.start_s = std::min(prev.start_s, e.start_s);
            prev.end_s = std::max(prev.end_s, e.end_s);
            prev.amplitude_db += e.amplitude_db;
            continue;
        }
        edges.push_back(e);
    }

    // Neighbouring spans meet at the middle of any overlap.
    for (std::size_t i = 1; i < edges.size(); ++i) {
        auto& prev = edges[i - 1];
        auto& cur = edges[i];
        if (prev.end_s > cur.start_s) {
            const double cut = 0.5 * (prev.end_s + cur.start_s);
            prev.end_s = cut;
            cur.start_s = cut;
        }
    }
    std::vector<PrimitiveEvent> out;
    for (auto& e : edges) {
        if (!(e.end_s > e.start_s)) continue;
        e.speed = speed_from_duration(e.duration_s());
        out.push_back(e);
    }
    return out;
}

inline std::vector<PrimitiveEvent> detect_edges(const RssiTrace& trace, const ExtractorConfig& config,
                                                std::optional<int> fallback_level = std::nullopt,
                                                const RssiTrace* raw = nullptr) {
    validate_trace(trace);
    validate_config(config);
    const int level = resolve_level(trace.samples, config, fallback_level.value_or(config.analysis_level));
    return detect_edges_at_level(trace, config, level, raw);
}

// --- pauses -----------------------------------------------------------------

inline std::vector<PrimitiveEvent> detect_pauses(const RssiTrace& trace, const ExtractorConfig& config) {
    validate_trace(trace);
    validate_config(config);
    std::vector<PrimitiveEvent> pauses;
    const auto window = static_cast<std::size_t>(std::llround(config.pause_min_s * trace.sample_rate_hz));
    const std::size_t n = trace.size();
    if (window < 2 || window > n) return pauses;

    const double ref = trace.mean();
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = trace.samples[i] - ref;
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    std::vector<char> stable(n, 0);
    const double w = static_cast<double>(window);
    for (std::size_t i = 0; i + window <= n; ++i) {
        const double mean = (s1[i + window] - s1[i]) / w;
        const double var = (s2[i + window] - s2[i]) / w - mean * mean;
        if (var <= config.pause_variance_db2)
            std::fill(stable.begin() + static_cast<std::ptrdiff_t>(i),
                      stable.begin() + static_cast<std::ptrdiff_t>(i + window), 1);
    }
    std::size_t i = 0;
    while (i < n) {
        if (!stable[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && stable[j]) ++j;
        PrimitiveEvent p;
        p.kind = PrimitiveKind::Pause;
        p.start_s = trace.time_at(i);
        p.end_s = trace.start_time_s + static_cast<double>(j) / trace.sample_rate_hz;
        if (p.duration_s() >= config.pause_min_s - 1e-9) pauses.push_back(p);
        i = j;
    }
    return pauses;
}

// --- merged primitive stream -------------------------------------------------

// Pauses survive only in the gaps between edges, and only if still >= pause_min_s.
inline std::vector<PrimitiveEvent> merge_primitives(std::vector<PrimitiveEvent> edges,
                                                    const std::vector<PrimitiveEvent>& pauses, double pause_min_s) {
    std::sort(edges.begin(), edges.end(),
              [](const PrimitiveEvent& a, const PrimitiveEvent& b) { return a.start_s < b.start_s; });
    std::vector<PrimitiveEvent> out = edges;
    for (const auto& pause : pauses) {
        std::vector<std::pair<double, double>> pieces{{pause.start_s, pause.end_s}};
        for (const auto& e : edges) {
            std::vector<std::pair<double, double>> next;
            for (auto [a, b] : pieces) {
                if (e.end_s <= a || e.start_s >= b) {
                    next.emplace_back(a, b);
                    continue;
                }
                if (e.start_s > a) next.emplace_back(a, e.start_s);
                if (e.end_s < b) next.emplace_back(e.end_s, b);
            }
            pieces.swap(next);
        }
        for (auto [a, b] : pieces) {
            if (b - a < pause_min_s - 1e-9) continue;
            PrimitiveEvent p;
            p.kind = PrimitiveKind::Pause;
            p.start_s = a;
            p.end_s = b;
            out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const PrimitiveEvent& a, const PrimitiveEvent& b) { return a.start_s < b.start_s; });
    return out;
}

inline Magnitude classify_magnitude(double amplitude_db, const std::optional<CalibrationProfile>& calibration,
                                    double magnitude_fraction) {
    if (!calibration || !(calibration->preamble_drop_db > 0.0)) return Magnitude::NA;
    return amplitude_db >= magnitude_fraction * calibration->preamble_drop_db ? Magnitude::High : Magnitude::Low;
}

inline std::vector<PrimitiveEvent> extract_primitives(const RssiTrace& trace, const ExtractorConfig& config,
                                                      const std::optional<CalibrationProfile>& calibration = {},
                                                      const RssiTrace* raw = nullptr) {
    validate_trace(trace);
    validate_config(config);
    const int fallback = calibration ? calibration->motion_level : config.analysis_level;
    auto edges = detect_edges(trace, config, fallback, raw);
    for (auto& e : edges) e.magnitude = classify_magnitude(e.amplitude_db, calibration, config.magnitude_fraction);
    return merge_primitives(std::move(edges), detect_pauses(trace, config), config.pause_min_s);
}

}  // namespace wigest
