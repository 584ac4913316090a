#pragma once

// Sign-string encoding of primitives and exact template matching with count and
// repetition-frequency extraction.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wigest/extractor.hpp"
#include "wigest/templates.hpp"
#include "wigest/types.hpp"

namespace wigest {

struct GestureEvent {
    std::string family_name{kUnknownFamily};
    int count = 1;
    double frequency_hz = 0.0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string primitive_string;
    Speed speed = Speed::NA;          // most common edge speed
    Magnitude magnitude = Magnitude::NA;

    bool known() const noexcept { return family_name != kUnknownFamily; }
};

inline std::string encode(const std::vector<PrimitiveEvent>& primitives, bool flip = false) {
    std::string out;
    out.reserve(primitives.size());
    for (const auto& p : primitives) out += sign_of(flip ? flipped(p.kind) : p.kind);
    return out;
}

inline std::string swap_signs(std::string s) {
    for (char& c : s) {
        if (c == '+') c = '-';
        else if (c == '-') c = '+';
    }
    return s;
}

inline std::vector<PrimitiveEvent> flip_all(std::vector<PrimitiveEvent> primitives) {
    for (auto& p : primitives) p.kind = flipped(p.kind);
    return primitives;
}

struct TemplateMatch {
    const GestureTemplate* tmpl = nullptr;
    int count = 0;
};

// Largest decoding c * |pattern| of the whole string; ties go to the larger
// count, then the longer pattern, then the family name.
inline TemplateMatch best_match(std::string_view encoded, const TemplateSet& templates) {
    TemplateMatch best;
    if (encoded.empty()) return best;
    for (const auto& t : templates.templates()) {
        const auto len = t.pattern.size();
        if (encoded.size() % len != 0) continue;
        const auto c = static_cast<int>(encoded.size() / len);
        if (c > 1 && !t.repeatable) continue;
        bool ok = true;
        for (std::size_t i = 0; i < encoded.size() && ok; ++i) ok = encoded[i] == t.pattern[i % len];
        if (!ok) continue;
        const bool better = !best.tmpl || c > best.count ||
                            (c == best.count && len > best.tmpl->pattern.size()) ||
                            (c == best.count && len == best.tmpl->pattern.size() &&
                             t.family_name < best.tmpl->family_name);
        if (better) best = {&t, c};
    }
    return best;
}

namespace gesture_detail {

template <typename T>
T mode_of(const std::vector<T>& values, T fallback) {
    std::map<T, int> tally;
    for (T v : values) ++tally[v];
    T best = fallback;
    int most = 0;
    for (const auto& [v, n] : tally)
        if (n > most) {
            best = v;
            most = n;
        }
    return best;
}

}  // namespace gesture_detail

// `primitives` supplies timestamps and attributes; it must be the sequence that
// produced `encoded` (or empty, in which case timing fields stay zero).
inline GestureEvent match(std::string_view encoded, const TemplateSet& templates,
                          const std::vector<PrimitiveEvent>& primitives = {}) {
    if (!primitives.empty() && primitives.size() != encoded.size())
        fail(ErrorKind::Domain, "primitive list does not match the encoded string");
    GestureEvent out;
    out.primitive_string = std::string(encoded);
    if (!primitives.empty()) {
        out.start_s = primitives.front().start_s;
        out.end_s = primitives.back().end_s;
        std::vector<Speed> speeds;
        std::vector<Magnitude> mags;
        for (const auto& p : primitives)
            if (p.is_edge()) {
                speeds.push_back(p.speed);
                mags.push_back(p.magnitude);
            }
        out.speed = gesture_detail::mode_of(speeds, Speed::NA);
        out.magnitude = gesture_detail::mode_of(mags, Magnitude::NA);
    }

    const auto m = best_match(encoded, templates);
    if (!m.tmpl) return out;
    out.family_name = m.tmpl->family_name;
    out.count = m.count;
    if (m.count >= 2 && !primitives.empty()) {
        const auto len = m.tmpl->pattern.size();
        const double first = primitives.front().start_s;
        const double last = primitives[len * static_cast<std::size_t>(m.count - 1)].start_s;
        if (last > first) out.frequency_hz = (m.count - 1) / (last - first);
    }
    return out;
}

struct GestureWindow {
    double start_s = 0.0;
    double end_s = 0.0;
    CalibrationProfile calibration;
    // Analysis context never reaches before this (the preamble that opened the window).
    double floor_s = -std::numeric_limits<double>::infinity();
};

// Leading and trailing pauses are the stillness around the gesture, not part of it.
inline std::vector<PrimitiveEvent> trim_pauses(std::vector<PrimitiveEvent> primitives) {
    const auto first = std::find_if(primitives.begin(), primitives.end(),
                                    [](const PrimitiveEvent& p) { return p.is_edge(); });
    primitives.erase(primitives.begin(), first);
    while (!primitives.empty() && !primitives.back().is_edge()) primitives.pop_back();
    return primitives;
}

// Seconds of trace analysed on each side of a window so edges near its borders
// still get full wavelet support; only primitives centred inside are kept.
inline constexpr double kWindowContextS = 2.0;

inline std::vector<PrimitiveEvent> window_primitives(const GestureWindow& window, const RssiTrace& denoised,
                                                     const ExtractorConfig& config, const RssiTrace* raw = nullptr) {
    validate_trace(denoised);
    check_raw_alignment(denoised, raw);
    if (!(window.end_s > window.start_s)) fail(ErrorKind::Domain, "gesture window must have end > start");
    const auto first = denoised.index_at(std::max(window.floor_s, window.start_s - kWindowContextS));
    const auto last = denoised.index_at(window.end_s + kWindowContextS);
    if (last <= first) return {};
    auto cfg = config;
    // A slice shorter than the deepest level still gets analysed, just shallower.
    cfg.max_level = std::min(cfg.max_level, std::max(1, max_dwt_levels(last - first)));
    const auto slice = denoised.slice(first, last);
    if (slice.size() < 2) return {};
    std::optional<RssiTrace> raw_slice;
    if (raw) raw_slice = raw->slice(first, last);
    auto prims = extract_primitives(slice, cfg, window.calibration, raw_slice ? &*raw_slice : nullptr);
    std::erase_if(prims, [&](const PrimitiveEvent& p) {
        return p.mid_s() < window.start_s || p.mid_s() > window.end_s;
    });
    return trim_pauses(std::move(prims));
}

inline GestureEvent classify_window(const GestureWindow& window, const RssiTrace& denoised,
                                    const TemplateSet& templates, const ExtractorConfig& config,
                                    const RssiTrace* raw = nullptr) {
    const auto primitives = window_primitives(window, denoised, config, raw);
    auto event = match(encode(primitives, window.calibration.polarity_flipped), templates, primitives);
    if (primitives.empty()) {
        event.start_s = window.start_s;
        event.end_s = window.end_s;
    }
    return event;
}

}  // namespace wigest
