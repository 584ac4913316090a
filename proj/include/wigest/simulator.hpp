#pragma once

// Synthetic multi-AP RSSI scenarios with ground-truth labels.
//
// Every '+' primitive is a truncated logistic rise, '-' a fall and '0' a hold.
// Edge amplitude is a fraction of the AP's headroom above a -80 dBm floor, so
// stronger links see larger changes. Each AP sees the scripted waveforms scaled
// by its own geometric gain, optionally sign-inverted, plus white noise and
// independently drawn interference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/templates.hpp"
#include "wigest/trace.hpp"
#include "wigest/types.hpp"

namespace wigest {

struct SimulatorModel {
    double high_attenuation_fraction = 0.15;
    double low_attenuation_fraction = 0.07;
    double noise_floor_dbm = -80.0;
    double high_speed_ramp_s = 0.5;
    double medium_speed_ramp_s = 1.1;
    double low_speed_ramp_s = 2.0;
    double hold_s = 1.0;
    double min_gain = 0.6;
    double max_gain = 1.0;
    // The logistic is evaluated over [-k, k] scale units across the ramp.
    double logistic_half_width = 4.0;

    double ramp_s(Speed speed) const {
        switch (speed) {
            case Speed::High: return high_speed_ramp_s;
            case Speed::Medium: return medium_speed_ramp_s;
            case Speed::Low: return low_speed_ramp_s;
            case Speed::NA: break;
        }
        fail(ErrorKind::Domain, "edges need a speed class");
    }

    double amplitude_db(Magnitude magnitude, double baseline_dbm) const {
        const double headroom = std::max(0.0, baseline_dbm - noise_floor_dbm);
        switch (magnitude) {
            case Magnitude::High: return high_attenuation_fraction * headroom;
            case Magnitude::Low: return low_attenuation_fraction * headroom;
            case Magnitude::NA: break;
        }
        fail(ErrorKind::Domain, "edges need a magnitude class");
    }

    // 0 at u <= 0, 1 at u >= 1, monotone logistic in between.
    double ramp_shape(double u) const {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
        const double k = logistic_half_width;
        const double lo = logistic(-k);
        const double hi = logistic(k);
        return (logistic(k * (2.0 * u - 1.0)) - lo) / (hi - lo);
    }
};

enum class SpanType { Primitive, Gesture, Preamble, Interference };

inline std::string_view to_string(SpanType t) {
    switch (t) {
        case SpanType::Primitive: return "primitive";
        case SpanType::Gesture: return "gesture";
        case SpanType::Preamble: return "preamble";
        case SpanType::Interference: return "interference";
    }
    return "?";
}

struct TruthSpan {
    SpanType type = SpanType::Primitive;
    std::string label;  // sign for primitives, family for gestures
    double start_s = 0.0;
    double end_s = 0.0;
    int count = 1;
    Speed speed = Speed::NA;
    Magnitude magnitude = Magnitude::NA;
    int parent = -1;  // index of the owning gesture / preamble span, primitives only

    double duration_s() const noexcept { return end_s - start_s; }
};

struct GroundTruth {
    std::vector<TruthSpan> spans;

    std::vector<const TruthSpan*> of_type(SpanType type) const {
        std::vector<const TruthSpan*> out;
        for (const auto& s : spans)
            if (s.type == type) out.push_back(&s);
        return out;
    }
};

// One primitive of a rendered waveform, relative to the waveform start.
struct RampSegment {
    PrimitiveKind kind = PrimitiveKind::Pause;
    double start_s = 0.0;
    double duration_s = 0.0;
    double amplitude_db = 0.0;  // signed change contributed by the segment
};

struct SynthWaveform {
    double sample_rate_hz = kDefaultSampleRateHz;
    std::vector<RampSegment> segments;
    std::vector<double> delta_db;  // offset from baseline, one value per sample
    std::vector<TruthSpan> primitives;

    double duration_s() const {
        return segments.empty() ? 0.0 : segments.back().start_s + segments.back().duration_s;
    }
};

// Renders time-sorted segments at n samples; completed ramps are folded into a
// running level so the cost stays linear in n plus the segment count.
inline std::vector<double> render_samples(const std::vector<RampSegment>& segments, const SimulatorModel& model,
                                          double sample_rate_hz, std::size_t n) {
    std::vector<double> out(n, 0.0);
    double settled = 0.0;
    std::size_t done = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        while (done < segments.size() && segments[done].start_s + segments[done].duration_s <= t) {
            settled += segments[done].kind == PrimitiveKind::Pause ? 0.0 : segments[done].amplitude_db;
            ++done;
        }
        double level = settled;
        for (std::size_t k = done; k < segments.size() && segments[k].start_s < t; ++k) {
            const auto& s = segments[k];
            if (s.kind == PrimitiveKind::Pause) continue;
            level += s.amplitude_db * model.ramp_shape((t - s.start_s) / s.duration_s);
        }
        out[i] = level;
    }
    return out;
}

inline std::vector<double> sample_segments(const std::vector<RampSegment>& segments, const SimulatorModel& model,
                                           double sample_rate_hz, double duration_s) {
    const auto n = static_cast<std::size_t>(std::ceil(duration_s * sample_rate_hz - 1e-9));
    return render_samples(segments, model, sample_rate_hz, n);
}

inline std::vector<RampSegment> segments_for_pattern(std::string_view pattern, int count, double ramp_s,
                                                     double amplitude_db, double hold_s, double t0 = 0.0) {
    std::vector<RampSegment> out;
    double t = t0;
    for (int rep = 0; rep < count; ++rep) {
        for (char c : pattern) {
            const auto kind = kind_from_sign(c);
            RampSegment seg{kind, t, kind == PrimitiveKind::Pause ? hold_s : ramp_s, 0.0};
            if (kind == PrimitiveKind::RisingEdge) seg.amplitude_db = amplitude_db;
            if (kind == PrimitiveKind::FallingEdge) seg.amplitude_db = -amplitude_db;
            out.push_back(seg);
            t += seg.duration_s;
        }
    }
    return out;
}

inline std::vector<TruthSpan> truth_for_segments(const std::vector<RampSegment>& segments, Speed speed,
                                                 Magnitude magnitude, int parent) {
    std::vector<TruthSpan> out;
    for (const auto& s : segments) {
        TruthSpan span;
        span.type = SpanType::Primitive;
        span.label = std::string(1, sign_of(s.kind));
        span.start_s = s.start_s;
        span.end_s = s.start_s + s.duration_s;
        if (s.kind != PrimitiveKind::Pause) {
            span.speed = speed;
            span.magnitude = magnitude;
        }
        span.parent = parent;
        out.push_back(span);
    }
    return out;
}

inline SynthWaveform synth_gesture_waveform(std::string_view family, int count, Speed speed, Magnitude magnitude,
                                            double baseline_dbm, const TemplateSet& templates = default_templates(),
                                            const SimulatorModel& model = {},
                                            double sample_rate_hz = kDefaultSampleRateHz) {
    const auto* tmpl = templates.find(family);
    if (!tmpl) fail(ErrorKind::Domain, "unknown gesture family '" + std::string(family) + "'");
    if (count < 1) fail(ErrorKind::Domain, "gesture count must be >= 1");
    if (count > 1 && !tmpl->repeatable)
        fail(ErrorKind::Domain, "family '" + std::string(family) + "' is not repeatable");

    SynthWaveform out;
    out.sample_rate_hz = sample_rate_hz;
    out.segments = segments_for_pattern(tmpl->pattern, count, model.ramp_s(speed),
                                        model.amplitude_db(magnitude, baseline_dbm), model.hold_s);
    out.primitives = truth_for_segments(out.segments, speed, magnitude, -1);
    // One trailing sample so the final plateau is visible.
    out.delta_db = sample_segments(out.segments, model, sample_rate_hz, out.duration_s() + 1.0 / sample_rate_hz);
    return out;
}

// --- scenario scripts -------------------------------------------------------

struct ApSpec {
    std::string id;
    double baseline_dbm = -40.0;
    double noise_sigma_db = 0.0;
    std::optional<double> gain;  // drawn from [min_gain, max_gain] when unset
    bool flipped = false;
};

struct ScriptedPreamble {
    double start_s = 0.0;
    std::optional<double> drop_db;  // per-AP high-magnitude amplitude when unset
    int updown_count = 2;
    Speed speed = Speed::High;
    double hold_s = 1.0;
};

struct ScriptedGesture {
    double start_s = 0.0;
    std::string family;
    int count = 1;
    Speed speed = Speed::High;
    Magnitude magnitude = Magnitude::High;
};

enum class InterferenceShape { RandomWalk, Humanlike };

struct ScriptedInterference {
    double start_s = 0.0;
    double duration_s = 1.0;
    double amplitude_db = 3.0;
    InterferenceShape shape = InterferenceShape::RandomWalk;
};

using ScriptEvent = std::variant<ScriptedPreamble, ScriptedGesture, ScriptedInterference>;

struct ScenarioScript {
    double sample_rate_hz = kDefaultSampleRateHz;
    double duration_s = 10.0;
    std::uint64_t seed = 1;
    std::vector<ApSpec> aps;
    std::vector<ScriptEvent> events;
    SimulatorModel model;
};

// Preamble: drop, hold, updown_count x (rise, fall), release back to baseline.
inline std::vector<RampSegment> preamble_segments(const ScriptedPreamble& p, double drop_db,
                                                  const SimulatorModel& model) {
    const double ramp = model.ramp_s(p.speed);
    std::vector<RampSegment> out;
    double t = p.start_s;
    out.push_back({PrimitiveKind::FallingEdge, t, ramp, -drop_db});
    t += ramp;
    out.push_back({PrimitiveKind::Pause, t, p.hold_s, 0.0});
    t += p.hold_s;
    for (int i = 0; i < p.updown_count; ++i) {
        out.push_back({PrimitiveKind::RisingEdge, t, ramp, drop_db});
        t += ramp;
        out.push_back({PrimitiveKind::FallingEdge, t, ramp, -drop_db});
        t += ramp;
    }
    out.push_back({PrimitiveKind::RisingEdge, t, ramp, drop_db});
    return out;
}

inline double event_start(const ScriptEvent& e) {
    return std::visit([](const auto& v) { return v.start_s; }, e);
}

inline double event_duration(const ScriptEvent& e, const SimulatorModel& model, const TemplateSet& templates) {
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ScriptedPreamble>) {
                return model.ramp_s(v.speed) * (2.0 + 2.0 * v.updown_count) + v.hold_s;
            } else if constexpr (std::is_same_v<T, ScriptedGesture>) {
                const auto& tmpl = templates.at(v.family);
                double d = 0.0;
                for (char c : tmpl.pattern) d += c == '0' ? model.hold_s : model.ramp_s(v.speed);
                return d * v.count;
            } else {
                return v.duration_s;
            }
        },
        e);
}

inline void validate_script(const ScenarioScript& script, const TemplateSet& templates = default_templates()) {
    const auto bad = [](const std::string& what) { fail(ErrorKind::Validation, what); };
    if (!(script.sample_rate_hz > 0.0)) bad("sample_rate_hz must be positive");
    if (!(script.duration_s > 0.0)) bad("duration_s must be positive");
    if (script.aps.empty()) bad("script declares no APs");
    for (std::size_t i = 0; i < script.aps.size(); ++i) {
        const auto& ap = script.aps[i];
        if (ap.id.empty()) bad("AP with empty id");
        if (!(ap.noise_sigma_db >= 0.0)) bad("AP '" + ap.id + "' has negative noise");
        if (ap.baseline_dbm < kMinPlausibleRssiDbm || ap.baseline_dbm > kMaxPlausibleRssiDbm)
            bad("AP '" + ap.id + "' baseline outside [-120, 0] dBm");
        if (ap.gain && !(*ap.gain > 0.0)) bad("AP '" + ap.id + "' gain must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (script.aps[j].id == ap.id) bad("duplicate AP id '" + ap.id + "'");
    }

    std::vector<std::pair<double, double>> spans;
    for (const auto& e : script.events) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, ScriptedPreamble>) {
                    if (v.updown_count < 1) bad("preamble updown count must be >= 1");
                    if (v.drop_db && !(*v.drop_db > 0.0)) bad("preamble drop must be positive");
                    if (!(v.hold_s > 0.0)) bad("preamble hold must be positive");
                } else if constexpr (std::is_same_v<T, ScriptedGesture>) {
                    const auto* t = templates.find(v.family);
                    if (!t) bad("unknown gesture family '" + v.family + "'");
                    if (v.count < 1) bad("gesture count must be >= 1");
                    if (v.count > 1 && !t->repeatable) bad("family '" + v.family + "' is not repeatable");
                    if (v.speed == Speed::NA || v.magnitude == Magnitude::NA) bad("gesture needs speed and magnitude");
                } else {
                    if (!(v.duration_s > 0.0)) bad("interference duration must be positive");
                    if (!(v.amplitude_db >= 0.0)) bad("interference amplitude must be >= 0");
                }
            },
            e);
        const double start = event_start(e);
        const double end = start + event_duration(e, script.model, templates);
        if (start < 0.0) bad("event starts before t=0");
        if (end > script.duration_s + 1e-9) bad("event ends after the scenario duration");
        spans.emplace_back(start, end);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second - 1e-9)
            bad("scripted events overlap at t=" + std::to_string(spans[i].first));
}

struct Scenario {
    TraceBundle bundle;
    GroundTruth truth;
    std::vector<double> gains;  // resolved per-AP gains
};

namespace sim_detail {

inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
    return std::mt19937_64(seq);
}

inline double smoothstep_taper(double u) {
    // Hann-like taper so bursts start and end at zero offset.
    return 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * std::clamp(u, 0.0, 1.0));
}

inline std::vector<double> random_walk_burst(std::size_t n, double amplitude, double sample_rate_hz,
                                             std::mt19937_64& rng) {
    std::vector<double> walk(n, 0.0);
    if (n < 2 || amplitude <= 0.0) return walk;
    std::normal_distribution<double> step(0.0, 1.0);
    double x = 0.0;
    for (auto& w : walk) {
        x += step(rng);
        w = x;
    }
    // Smooth over ~0.2 s so the wiggles look like body motion, not sample noise.
    const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(0.2 * sample_rate_hz));
    std::vector<double> smooth(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += walk[i];
        if (i >= win) acc -= walk[i - win];
        smooth[i] = acc / static_cast<double>(std::min(i + 1, win));
    }
    const double mean = std::accumulate(smooth.begin(), smooth.end(), 0.0) / static_cast<double>(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        smooth[i] = (smooth[i] - mean) * smoothstep_taper(static_cast<double>(i) / static_cast<double>(n - 1));
        peak = std::max(peak, std::abs(smooth[i]));
    }
    if (peak > 0.0)
        for (auto& v : smooth) v *= amplitude / peak;
    return smooth;
}

// A passer-by: a few random edges at reduced amplitude that return to zero.
inline std::vector<RampSegment> humanlike_burst(double start_s, double duration_s, double amplitude,
                                                const SimulatorModel& model, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<RampSegment> out;
    double t = start_s;
    double level = 0.0;
    const double end = start_s + duration_s;
    const Speed speeds[] = {Speed::High, Speed::Medium, Speed::Low};
    while (true) {
        const double ramp = model.ramp_s(speeds[static_cast<int>(unit(rng) * 3.0) % 3]);
        const double gap = 0.6 * unit(rng) * unit(rng) * model.hold_s;
        // Leave room for a closing edge back to zero.
        if (t + gap + 2.0 * ramp > end) break;
        t += gap;
        double target = (unit(rng) < 0.5 ? -1.0 : 1.0) * amplitude * (0.5 + 0.5 * unit(rng));
        if (std::abs(level) > 1e-12 && unit(rng) < 0.6) target = 0.0;
        const double change = target - level;
        if (std::abs(change) < 0.25 * amplitude) continue;
        out.push_back({change > 0 ? PrimitiveKind::RisingEdge : PrimitiveKind::FallingEdge, t, ramp, change});
        level = target;
        t += ramp;
    }
    if (std::abs(level) > 1e-12) {
        const double ramp = std::min(model.high_speed_ramp_s, std::max(1e-3, end - t));
        out.push_back({level < 0 ? PrimitiveKind::RisingEdge : PrimitiveKind::FallingEdge, t, ramp, -level});
    }
    return out;
}

}  // namespace sim_detail

inline std::vector<double> resolve_gains(const ScenarioScript& script) {
    auto rng = sim_detail::stream(script.seed, 0x6a1f);
    std::uniform_real_distribution<double> gain(script.model.min_gain, script.model.max_gain);
    std::vector<double> out;
    for (const auto& ap : script.aps) {
        const double drawn = gain(rng);  // drawn unconditionally so explicit gains do not shift the stream
        out.push_back(ap.gain.value_or(drawn));
    }
    return out;
}

inline Scenario generate_scenario(const ScenarioScript& script, const TemplateSet& templates = default_templates()) {
    validate_script(script, templates);
    const auto& model = script.model;
    const double rate = script.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(script.duration_s * rate));

    Scenario out;
    out.gains = resolve_gains(script);

    // Ground truth is AP-independent; waveforms are rendered per AP below.
    std::vector<std::size_t> order(script.events.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return event_start(script.events[a]) < event_start(script.events[b]);
    });
    for (std::size_t idx : order) {
        const auto& e = script.events[idx];
        const double start = event_start(e);
        const double end = start + event_duration(e, model, templates);
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                TruthSpan span;
                span.start_s = start;
                span.end_s = end;
                if constexpr (std::is_same_v<T, ScriptedPreamble>) {
                    span.type = SpanType::Preamble;
                    span.label = "preamble";
                    span.count = v.updown_count;
                    span.speed = v.speed;
                    const int parent = static_cast<int>(out.truth.spans.size());
                    out.truth.spans.push_back(span);
                    for (auto p : truth_for_segments(preamble_segments(v, 1.0, model), v.speed, Magnitude::High, parent))
                        out.truth.spans.push_back(p);
                } else if constexpr (std::is_same_v<T, ScriptedGesture>) {
                    span.type = SpanType::Gesture;
                    span.label = v.family;
                    span.count = v.count;
                    span.speed = v.speed;
                    span.magnitude = v.magnitude;
                    const int parent = static_cast<int>(out.truth.spans.size());
                    out.truth.spans.push_back(span);
                    const auto segs = segments_for_pattern(templates.at(v.family).pattern, v.count,
                                                           model.ramp_s(v.speed), 1.0, model.hold_s, v.start_s);
                    for (auto p : truth_for_segments(segs, v.speed, v.magnitude, parent)) out.truth.spans.push_back(p);
                } else {
                    span.type = SpanType::Interference;
                    span.label = v.shape == InterferenceShape::RandomWalk ? "randomwalk" : "humanlike";
                    out.truth.spans.push_back(span);
                }
            },
            e);
    }

    std::vector<RssiTrace> traces;
    for (std::size_t a = 0; a < script.aps.size(); ++a) {
        const auto& ap = script.aps[a];
        const double gain = out.gains[a] * (ap.flipped ? -1.0 : 1.0);

        std::vector<RampSegment> segments;
        std::vector<double> samples(n, ap.baseline_dbm);
        for (std::size_t ei = 0; ei < script.events.size(); ++ei) {
            const auto& e = script.events[ei];
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, ScriptedPreamble>) {
                        const double drop = v.drop_db.value_or(model.amplitude_db(Magnitude::High, ap.baseline_dbm));
                        for (auto s : preamble_segments(v, drop * gain, model)) segments.push_back(s);
                    } else if constexpr (std::is_same_v<T, ScriptedGesture>) {
                        const double amp = model.amplitude_db(v.magnitude, ap.baseline_dbm) * gain;
                        for (auto s : segments_for_pattern(templates.at(v.family).pattern, v.count,
                                                           model.ramp_s(v.speed), amp, model.hold_s, v.start_s))
                            segments.push_back(s);
                    } else {
                        auto rng = sim_detail::stream(script.seed, 0x1f7e, a, ei);
                        const double amp = v.amplitude_db * std::abs(gain);
                        if (v.shape == InterferenceShape::RandomWalk) {
                            const auto first = static_cast<std::size_t>(std::llround(v.start_s * rate));
                            const auto len = std::min(n - std::min(n, first),
                                                      static_cast<std::size_t>(std::llround(v.duration_s * rate)));
                            const auto burst = sim_detail::random_walk_burst(len, amp, rate, rng);
                            for (std::size_t i = 0; i < burst.size(); ++i) samples[first + i] += burst[i];
                        } else {
                            for (auto s : sim_detail::humanlike_burst(v.start_s, v.duration_s, amp, model, rng))
                                segments.push_back(s);
                        }
                    }
                },
                e);
        }
        std::sort(segments.begin(), segments.end(),
                  [](const RampSegment& x, const RampSegment& y) { return x.start_s < y.start_s; });
        if (!segments.empty()) {
            const auto rendered = render_samples(segments, model, rate, n);
            for (std::size_t i = 0; i < n; ++i) samples[i] += rendered[i];
        }

        if (ap.noise_sigma_db > 0.0) {
            auto rng = sim_detail::stream(script.seed, 0x9015e, a);
            std::normal_distribution<double> noise(0.0, ap.noise_sigma_db);
            for (auto& s : samples) s += noise(rng);
        }
        for (auto& s : samples) s = std::clamp(s, kMinPlausibleRssiDbm, kMaxPlausibleRssiDbm);
        traces.push_back(RssiTrace{ap.id, rate, 0.0, std::move(samples)});
    }
    out.bundle = TraceBundle(std::move(traces));
    return out;
}

struct SweepPoint {
    double sigma_db = 0.0;
    Scenario scenario;
};

// Same script and seed at each noise level, so only the noise amplitude changes.
inline std::vector<SweepPoint> snr_sweep(const ScenarioScript& script, const std::vector<double>& sigma_list,
                                         const TemplateSet& templates = default_templates()) {
    std::vector<SweepPoint> out;
    for (double sigma : sigma_list) {
        auto s = script;
        for (auto& ap : s.aps) ap.noise_sigma_db = sigma;
        out.push_back({sigma, generate_scenario(s, templates)});
    }
    return out;
}

// --- script text format -----------------------------------------------------
//
//   # comment
//   sample_rate_hz = 50
//   duration_s = 20
//   seed = 7
//   ap AP1 baseline=-40 noise=1.0 [gain=0.8] [flipped=true]
//   event preamble start=1 [drop=6] [updowns=2] [speed=high] [hold=1]
//   event gesture start=8 family=Up-Down [count=1] [speed=high] [magnitude=high]
//   event interference start=15 duration=4 amplitude=5 [shape=randomwalk|humanlike]

namespace sim_detail {

inline std::map<std::string, std::string> parse_kv(const std::vector<std::string>& tokens, std::size_t from,
                                                   const std::string& where) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = from; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorKind::Parse, where + "expected key=value, got '" + tokens[i] + "'");
        kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    return kv;
}

inline double num(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& where) {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::Parse, where + "missing '" + key + "'");
    const auto v = detail::parse_double(it->second);
    if (!v) fail(ErrorKind::Parse, where + "bad number for '" + key + "'");
    return *v;
}

inline std::optional<double> opt_num(const std::map<std::string, std::string>& kv, const std::string& key,
                                     const std::string& where) {
    if (!kv.count(key)) return std::nullopt;
    return num(kv, key, where);
}

inline void reject_unknown(const std::map<std::string, std::string>& kv, std::initializer_list<std::string_view> known,
                           const std::string& where) {
    for (const auto& [k, v] : kv)
        if (std::find(known.begin(), known.end(), k) == known.end())
            fail(ErrorKind::Parse, where + "unknown key '" + k + "'");
}

}  // namespace sim_detail

inline ScenarioScript read_script(std::istream& in) {
    ScenarioScript script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto where = "script line " + std::to_string(line_no) + ": ";
        std::istringstream words(line);
        std::vector<std::string> tokens;
        for (std::string w; words >> w;) tokens.push_back(w);
        if (tokens.empty()) continue;

        if (tokens[0] == "ap") {
            if (tokens.size() < 2) fail(ErrorKind::Parse, where + "ap needs an id");
            const auto kv = sim_detail::parse_kv(tokens, 2, where);
            sim_detail::reject_unknown(kv, {"baseline", "noise", "gain", "flipped"}, where);
            ApSpec ap;
            ap.id = tokens[1];
            ap.baseline_dbm = sim_detail::opt_num(kv, "baseline", where).value_or(-40.0);
            ap.noise_sigma_db = sim_detail::opt_num(kv, "noise", where).value_or(0.0);
            ap.gain = sim_detail::opt_num(kv, "gain", where);
            if (kv.count("flipped") && !parse_bool(kv.at("flipped"), ap.flipped))
                fail(ErrorKind::Parse, where + "bad flipped flag");
            script.aps.push_back(ap);
        } else if (tokens[0] == "event") {
            if (tokens.size() < 2) fail(ErrorKind::Parse, where + "event needs a type");
            const auto kv = sim_detail::parse_kv(tokens, 2, where);
            if (tokens[1] == "preamble") {
                sim_detail::reject_unknown(kv, {"start", "drop", "updowns", "speed", "hold"}, where);
                ScriptedPreamble p;
                p.start_s = sim_detail::num(kv, "start", where);
                p.drop_db = sim_detail::opt_num(kv, "drop", where);
                p.updown_count = static_cast<int>(sim_detail::opt_num(kv, "updowns", where).value_or(2));
                if (kv.count("speed")) p.speed = parse_speed(kv.at("speed"));
                p.hold_s = sim_detail::opt_num(kv, "hold", where).value_or(1.0);
                script.events.emplace_back(p);
            } else if (tokens[1] == "gesture") {
                sim_detail::reject_unknown(kv, {"start", "family", "count", "speed", "magnitude"}, where);
                ScriptedGesture g;
                g.start_s = sim_detail::num(kv, "start", where);
                if (!kv.count("family")) fail(ErrorKind::Parse, where + "gesture needs family=");
                g.family = kv.at("family");
                g.count = static_cast<int>(sim_detail::opt_num(kv, "count", where).value_or(1));
                if (kv.count("speed")) g.speed = parse_speed(kv.at("speed"));
                if (kv.count("magnitude")) g.magnitude = parse_magnitude(kv.at("magnitude"));
                script.events.emplace_back(g);
            } else if (tokens[1] == "interference") {
                sim_detail::reject_unknown(kv, {"start", "duration", "amplitude", "shape"}, where);
                ScriptedInterference i;
                i.start_s = sim_detail::num(kv, "start", where);
                i.duration_s = sim_detail::num(kv, "duration", where);
                i.amplitude_db = sim_detail::opt_num(kv, "amplitude", where).value_or(3.0);
                if (kv.count("shape")) {
                    const auto& shape = kv.at("shape");
                    if (shape == "randomwalk") i.shape = InterferenceShape::RandomWalk;
                    else if (shape == "humanlike") i.shape = InterferenceShape::Humanlike;
                    else fail(ErrorKind::Parse, where + "unknown shape '" + shape + "'");
                }
                script.events.emplace_back(i);
            } else {
                fail(ErrorKind::Parse, where + "unknown event type '" + tokens[1] + "'");
            }
        } else {
            std::string joined;
            for (const auto& t : tokens) joined += t;
            const auto eq = joined.find('=');
            if (eq == std::string::npos || eq == 0) fail(ErrorKind::Parse, where + "unrecognised line");
            const auto key = joined.substr(0, eq);
            const auto value = detail::parse_double(joined.substr(eq + 1));
            if (!value) fail(ErrorKind::Parse, where + "bad value for '" + key + "'");
            if (key == "sample_rate_hz") script.sample_rate_hz = *value;
            else if (key == "duration_s") script.duration_s = *value;
            else if (key == "seed") script.seed = static_cast<std::uint64_t>(*value);
            else if (key == "high_attenuation") script.model.high_attenuation_fraction = *value;
            else if (key == "low_attenuation") script.model.low_attenuation_fraction = *value;
            else fail(ErrorKind::Parse, where + "unknown setting '" + key + "'");
        }
    }
    return script;
}

inline ScenarioScript load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open script '" + path + "'");
    return read_script(in);
}

inline void write_script(std::ostream& out, const ScenarioScript& s) {
    out << "sample_rate_hz = " << s.sample_rate_hz << "\n";
    out << "duration_s = " << s.duration_s << "\n";
    out << "seed = " << s.seed << "\n";
    for (const auto& ap : s.aps) {
        out << "ap " << ap.id << " baseline=" << ap.baseline_dbm << " noise=" << ap.noise_sigma_db;
        if (ap.gain) out << " gain=" << *ap.gain;
        if (ap.flipped) out << " flipped=true";
        out << "\n";
    }
    for (const auto& e : s.events) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, ScriptedPreamble>) {
                    out << "event preamble start=" << v.start_s << " updowns=" << v.updown_count
                        << " speed=" << to_string(v.speed) << " hold=" << v.hold_s;
                    if (v.drop_db) out << " drop=" << *v.drop_db;
                } else if constexpr (std::is_same_v<T, ScriptedGesture>) {
                    out << "event gesture start=" << v.start_s << " family=" << v.family << " count=" << v.count
                        << " speed=" << to_string(v.speed) << " magnitude=" << to_string(v.magnitude);
                } else {
                    out << "event interference start=" << v.start_s << " duration=" << v.duration_s
                        << " amplitude=" << v.amplitude_db
                        << " shape=" << (v.shape == InterferenceShape::RandomWalk ? "randomwalk" : "humanlike");
                }
            },
            e);
        out << "\n";
    }
}

// Ground-truth sidecar: one labelled span per line.
inline void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    out << "type,label,start_s,end_s,count,speed,magnitude,parent\n";
    for (const auto& s : truth.spans) {
        out << to_string(s.type) << ',' << s.label << ',' << detail::fixed4(s.start_s) << ','
            << detail::fixed4(s.end_s) << ',' << s.count << ',' << to_string(s.speed) << ','
            << to_string(s.magnitude) << ',' << s.parent << '\n';
    }
}

inline GroundTruth read_ground_truth(std::istream& in) {
    GroundTruth truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        if (line_no == 1 && text.substr(0, 5) == "type,") continue;
        const auto where = "truth line " + std::to_string(line_no) + ": ";
        const auto f = detail::split(text, ',');
        if (f.size() != 8) fail(ErrorKind::Parse, where + "expected 8 fields");
        TruthSpan s;
        if (f[0] == "primitive") s.type = SpanType::Primitive;
        else if (f[0] == "gesture") s.type = SpanType::Gesture;
        else if (f[0] == "preamble") s.type = SpanType::Preamble;
        else if (f[0] == "interference") s.type = SpanType::Interference;
        else fail(ErrorKind::Parse, where + "unknown span type '" + std::string(f[0]) + "'");
        s.label = std::string(f[1]);
        const auto a = detail::parse_double(f[2]), b = detail::parse_double(f[3]);
        const auto c = detail::parse_double(f[4]), p = detail::parse_double(f[7]);
        if (!a || !b || !c || !p) fail(ErrorKind::Parse, where + "bad number");
        s.start_s = *a;
        s.end_s = *b;
        s.count = static_cast<int>(*c);
        s.parent = static_cast<int>(*p);
        s.speed = f[5] == "na" ? Speed::NA : parse_speed(f[5]);
        s.magnitude = f[6] == "na" ? Magnitude::NA : parse_magnitude(f[6]);
        if (s.parent >= static_cast<int>(truth.spans.size()))
            fail(ErrorKind::Format, where + "parent must precede its children");
        truth.spans.push_back(std::move(s));
    }
    return truth;
}

inline GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open ground truth '" + path + "'");
    return read_ground_truth(in);
}

}  // namespace wigest
