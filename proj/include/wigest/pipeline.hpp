#pragma once

// End-to-end: denoise every AP, find preambles on the strongest AP, cut gesture
// windows there, extract primitives on every AP, fuse, match, map to actions.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wigest/actions.hpp"
#include "wigest/denoiser.hpp"
#include "wigest/extractor.hpp"
#include "wigest/fusion.hpp"
#include "wigest/gesture.hpp"
#include "wigest/segmenter.hpp"
#include "wigest/templates.hpp"
#include "wigest/trace.hpp"

namespace wigest {

enum class FusionGranularity { Primitive, Gesture };

struct PipelineConfig {
    DenoiseConfig denoise;
    ExtractorConfig extractor;
    SegmenterConfig segmenter;
    FusionGranularity fusion = FusionGranularity::Primitive;
};

struct WindowResult {
    GestureWindow window;                               // on the strongest AP
    std::vector<CalibrationProfile> calibration;        // per AP
    std::vector<std::vector<PrimitiveEvent>> per_ap;    // polarity already corrected
    std::vector<PrimitiveEvent> fused;
    std::string encoded;
    GestureEvent gesture;
    std::optional<ActionEvent> action;
};

struct PipelineResult {
    std::vector<ActionEvent> actions;
    std::vector<GestureEvent> gestures;
    std::vector<PreambleDetection> preambles;
    std::vector<WindowResult> windows;
    std::vector<RssiTrace> denoised;
    std::vector<double> noise_sigma;  // estimated from each raw trace
    std::size_t strongest = 0;
};

class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

namespace pipeline_detail {

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

inline ExtractorConfig with_sigma(ExtractorConfig cfg, double sigma) {
    if (!cfg.noise_sigma_db) cfg.noise_sigma_db = sigma;
    return cfg;
}

}  // namespace pipeline_detail

inline WindowResult classify_bundle_window(const GestureWindow& window, const PreambleDetection& preamble,
                                           const PipelineResult& state, const TraceBundle& bundle,
                                           const PipelineConfig& config, const TemplateSet& templates,
                                           const RuleSet& rules) {
    using namespace pipeline_detail;
    WindowResult r;
    r.window = window;
    std::vector<ApEvents> streams;
    std::vector<ApDecision<std::string>> family_votes;
    std::vector<GestureEvent> per_ap_gestures;
    for (std::size_t a = 0; a < bundle.size(); ++a) {
        const auto cal = a == state.strongest ? window.calibration
                                              : staged("calibrate", [&] {
                                                    return calibrate_over(state.denoised[a], preamble, config.segmenter);
                                                });
        r.calibration.push_back(cal);
        GestureWindow w = window;
        w.calibration = cal;
        const auto ecfg = with_sigma(config.extractor, state.noise_sigma[a]);
        auto prims = staged("extract", [&] { return window_primitives(w, state.denoised[a], ecfg, &bundle[a]); });
        if (cal.polarity_flipped) prims = flip_all(std::move(prims));
        r.per_ap.push_back(prims);
        streams.push_back({bundle[a].ap_id, bundle.mean_rssi(a), prims});
        auto g = match(encode(prims), templates, prims);
        family_votes.push_back({bundle[a].ap_id, bundle.mean_rssi(a), g.family_name, g.start_s, g.end_s});
        per_ap_gestures.push_back(std::move(g));
    }

    if (config.fusion == FusionGranularity::Primitive) {
        r.fused = trim_pauses(staged("fuse", [&] { return fuse_events(streams); }));
        r.encoded = encode(r.fused);
        r.gesture = match(r.encoded, templates, r.fused);
    } else {
        const auto family = staged("fuse", [&] { return fuse(family_votes); });
        std::size_t pick = state.strongest;
        for (std::size_t a = 0; a < per_ap_gestures.size(); ++a) {
            if (per_ap_gestures[a].family_name != family) continue;
            if (per_ap_gestures[pick].family_name != family || bundle.mean_rssi(a) > bundle.mean_rssi(pick)) pick = a;
        }
        r.fused = r.per_ap[pick];
        r.encoded = per_ap_gestures[pick].primitive_string;
        r.gesture = per_ap_gestures[pick];
    }
    if (r.fused.empty()) {
        r.gesture.start_s = window.start_s;
        r.gesture.end_s = window.end_s;
    }
    r.action = map_action(r.gesture, rules);
    return r;
}

inline PipelineResult run_pipeline(const TraceBundle& bundle, const PipelineConfig& config = {},
                                   const TemplateSet& templates = default_templates(),
                                   const RuleSet& rules = default_rules()) {
    using namespace pipeline_detail;
    if (bundle.empty()) fail(ErrorKind::EmptyInput, "bundle has no traces");
    validate_config(config.segmenter);
    validate_config(config.extractor);

    PipelineResult out;
    out.strongest = bundle.strongest();
    for (const auto& t : bundle.traces()) {
        staged("denoise", [&] {
            validate_trace(t);
            auto dcfg = config.denoise;
            dcfg.levels = std::min(dcfg.levels, max_dwt_levels(t.size()));
            if (dcfg.levels < 1) fail(ErrorKind::Domain, "trace '" + t.ap_id + "' is too short to denoise");
            auto d = denoise_samples(t.samples, dcfg);
            RssiTrace clean = t;
            clean.samples = std::move(d.samples);
            out.denoised.push_back(std::move(clean));
            out.noise_sigma.push_back(d.sigma);
            return 0;
        });
    }

    const auto& raw = bundle[out.strongest];
    const auto& clean = out.denoised[out.strongest];
    const auto ecfg = with_sigma(config.extractor, out.noise_sigma[out.strongest]);
    double from = raw.start_time_s;
    while (from < raw.end_time_s()) {
        const auto preamble = staged("segment", [&] {
            return detect_preamble(raw, config.segmenter, ecfg, config.denoise, from);
        });
        if (!preamble) break;
        out.preambles.push_back(*preamble);
        const auto windows = staged("segment", [&] {
            return segment_gestures(clean, preamble->end_s, preamble->calibration, config.segmenter, ecfg, &raw);
        });
        if (windows.empty()) {
            from = preamble->end_s + config.segmenter.silence_timeout_s;
            continue;
        }
        for (const auto& w : windows) {
            auto r = classify_bundle_window(w, *preamble, out, bundle, config, templates, rules);
            out.gestures.push_back(r.gesture);
            if (r.action) out.actions.push_back(*r.action);
            out.windows.push_back(std::move(r));
        }
        from = window_close_s(windows.back(), config.segmenter);
    }
    return out;
}

// --- stage dumps ------------------------------------------------------------

inline void write_primitives_csv(std::ostream& out, const std::vector<WindowResult>& windows,
                                 const TraceBundle& bundle) {
    out << "window,source,kind,start_s,end_s,amplitude_db,speed,magnitude\n";
    const auto row = [&](std::size_t w, const std::string& source, const PrimitiveEvent& e) {
        out << w << ',' << source << ',' << to_string(e.kind) << ',' << detail::fixed4(e.start_s) << ','
            << detail::fixed4(e.end_s) << ',' << detail::fixed4(e.amplitude_db) << ',' << to_string(e.speed) << ','
            << to_string(e.magnitude) << '\n';
    };
    for (std::size_t w = 0; w < windows.size(); ++w) {
        for (std::size_t a = 0; a < windows[w].per_ap.size(); ++a)
            for (const auto& e : windows[w].per_ap[a]) row(w, bundle[a].ap_id, e);
        for (const auto& e : windows[w].fused) row(w, "fused", e);
    }
}

inline void write_gestures_csv(std::ostream& out, const std::vector<WindowResult>& windows) {
    out << "window,window_start_s,window_end_s,encoded,family,count,frequency_hz,speed,magnitude,action\n";
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto& r = windows[w];
        out << w << ',' << detail::fixed4(r.window.start_s) << ',' << detail::fixed4(r.window.end_s) << ','
            << r.encoded << ',' << r.gesture.family_name << ',' << r.gesture.count << ','
            << detail::fixed4(r.gesture.frequency_hz) << ',' << to_string(r.gesture.speed) << ','
            << to_string(r.gesture.magnitude) << ',' << (r.action ? r.action->action_name : "") << '\n';
    }
}

inline void write_preambles_csv(std::ostream& out, const std::vector<PreambleDetection>& preambles) {
    out << "start_s,hold_start_s,hold_end_s,end_s,drop_db,motion_level,polarity_flipped,baseline_dbm\n";
    for (const auto& p : preambles)
        out << detail::fixed4(p.start_s) << ',' << detail::fixed4(p.hold_start_s) << ','
            << detail::fixed4(p.hold_end_s) << ',' << detail::fixed4(p.end_s) << ','
            << detail::fixed4(p.calibration.preamble_drop_db) << ',' << p.calibration.motion_level << ','
            << (p.calibration.polarity_flipped ? "true" : "false") << ','
            << detail::fixed4(p.calibration.baseline_rssi_dbm) << '\n';
}

// Undecimated detail response at `level` for every AP, aligned to the window centre.
inline void write_details_csv(std::ostream& out, const std::vector<RssiTrace>& denoised, int level) {
    out << "ap_id,time_s,level,detail\n";
    for (const auto& t : denoised) {
        const auto r = stationary_detail(t.samples, level);
        const std::size_t half = std::size_t{1} << (level - 1);
        for (std::size_t n = 0; n < r.size(); ++n)
            out << t.ap_id << ',' << detail::fixed4(t.time_at(n + half)) << ',' << level << ','
                << detail::fixed4(r[n]) << '\n';
    }
}

inline void write_actions_csv(std::ostream& out, const std::vector<ActionEvent>& actions) {
    out << "action,family,start_s,end_s,count,frequency_hz,speed,magnitude\n";
    for (const auto& a : actions) {
        out << a.action_name << ',' << a.family_name << ',' << detail::fixed4(a.start_s) << ','
            << detail::fixed4(a.end_s) << ',' << (a.count ? std::to_string(*a.count) : "") << ','
            << (a.frequency_hz ? detail::fixed4(*a.frequency_hz) : "") << ','
            << (a.speed ? std::string(to_string(*a.speed)) : "") << ','
            << (a.magnitude ? std::string(to_string(*a.magnitude)) : "") << '\n';
    }
}

}  // namespace wigest
