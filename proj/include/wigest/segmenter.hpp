#pragma once

// Preamble detection, polarity, per-session calibration and gesture windows.
//
// A preamble is a hand held over the device (RSSI drops and stays down) followed
// by n up-down motions and the release. Stage 1 is a running-mean threshold that
// costs O(1) per sample; only when it fires does stage 2 denoise a few seconds of
// history and look for the alternating edge train.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "wigest/denoiser.hpp"
#include "wigest/extractor.hpp"
#include "wigest/gesture.hpp"
#include "wigest/trace.hpp"
#include "wigest/types.hpp"

namespace wigest {

struct SegmenterConfig {
    double drop_threshold_db = 3.0;
    int preamble_updown_count = 2;
    double silence_timeout_s = 2.0;
    double drop_window_s = 0.5;
    double baseline_window_s = 2.0;
    double search_budget_s = 4.0;   // per two up-downs; longer preambles get proportionally more
    double max_history_s = 10.0;
    double release_gap_s = 1.0;     // the release edge must start this soon after the last up-down
    double window_pad_s = 0.5;      // plateau context kept around a gesture window
    double train_min_ratio = 0.4;   // each up-down edge must reach this fraction of the drop
    double min_hold_s = 0.5;        // still time between the drop and the first up-down
    // Stage 2 sees only a few seconds, so levels 4+ hold too few coefficients
    // for SURE and the universal fallback wipes out the up-down peaks.
    int stage_two_denoise_levels = 4;
};

inline void validate_config(const SegmenterConfig& c) {
    if (!(c.drop_threshold_db > 0.0) || !(c.silence_timeout_s > 0.0) || !(c.drop_window_s > 0.0) ||
        !(c.baseline_window_s > 0.0) || !(c.search_budget_s > 0.0) || !(c.max_history_s > 0.0) ||
        !(c.release_gap_s > 0.0) || !(c.window_pad_s >= 0.0) || !(c.train_min_ratio >= 0.0) || !(c.min_hold_s >= 0.0) ||
        c.stage_two_denoise_levels < 1)
        fail(ErrorKind::Domain, "segmenter thresholds must be positive");
    if (c.preamble_updown_count < 1) fail(ErrorKind::Domain, "preamble_updown_count must be >= 1");
}

inline double search_budget_s(const SegmenterConfig& c) {
    return c.search_budget_s * std::max(1.0, c.preamble_updown_count / 2.0);
}

enum class FirstState { Drop, Rise };

// Drop is the expected first state; a rise means the session's signs are inverted.
constexpr bool resolve_polarity(FirstState first) noexcept { return first == FirstState::Rise; }

struct PreambleDetection {
    double start_s = 0.0;       // start of the drop edge
    double hold_start_s = 0.0;  // drop edge end
    double hold_end_s = 0.0;    // first up-down edge start
    double end_s = 0.0;         // end of the last consumed edge
    CalibrationProfile calibration;
};

namespace seg_detail {

// Mean of x over [first, last); 0 for an empty range.
inline double mean(const std::vector<double>& x, std::size_t first, std::size_t last) {
    first = std::min(first, x.size());
    last = std::clamp(last, first, x.size());
    if (last == first) return 0.0;
    double s = 0.0;
    for (std::size_t i = first; i < last; ++i) s += x[i];
    return s / static_cast<double>(last - first);
}

}  // namespace seg_detail

// Streaming detector: feed samples one at a time. Holds at most max_history_s.
class PreambleDetector {
public:
    // Stage 2 analyses this much trace before the trigger window, enough for the
    // whole drop edge plus a plateau to anchor its fit.
    static constexpr double kLookbackS = 2.0;

    PreambleDetector(double sample_rate_hz, SegmenterConfig config = {}, ExtractorConfig extractor = {},
                     DenoiseConfig denoise = {}, double start_time_s = 0.0)
        : rate_(sample_rate_hz), config_(config), extractor_(extractor), denoise_(denoise), t0_(start_time_s) {
        if (!(rate_ > 0.0)) fail(ErrorKind::Domain, "sample rate must be positive");
        validate_config(config_);
        validate_config(extractor_);
        short_n_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.drop_window_s * rate_)));
        base_n_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config_.baseline_window_s * rate_)));
        history_n_ = static_cast<std::size_t>(std::llround(config_.max_history_s * rate_));
        budget_n_ = static_cast<std::size_t>(std::llround(search_budget_s(config_) * rate_));
        // Stage 2 needs the trigger context plus the budget plus room for the release.
        const auto lookback = short_n_ + static_cast<std::size_t>(std::llround(kLookbackS * rate_));
        const auto needed = lookback + budget_n_ + static_cast<std::size_t>(std::llround((config_.release_gap_s + 1.0) * rate_));
        history_n_ = std::max(history_n_, needed + base_n_);
    }

    // Returns a detection once the whole preamble (including release) has been seen.
    std::optional<PreambleDetection> push(double sample) {
        buffer_.push_back(sample);
        ++count_;
        if (buffer_.size() > history_n_) buffer_.pop_front();

        // Stage 1 running sums: short window is the newest short_n_ samples, the
        // baseline window the base_n_ samples right before it.
        short_sum_ += sample;
        if (count_ > short_n_) {
            const double leaving = at(count_ - 1 - short_n_);
            short_sum_ -= leaving;
            base_sum_ += leaving;
        }
        if (count_ > short_n_ + base_n_) base_sum_ -= at(count_ - 1 - short_n_ - base_n_);

        if (pending_) {
            if (count_ >= pending_->wait_until) {
                auto result = stage_two(*pending_);
                pending_.reset();
                return result;
            }
            return std::nullopt;
        }
        if (count_ < short_n_ + base_n_) return std::nullopt;
        const double short_mean = short_sum_ / static_cast<double>(short_n_);
        const double base_mean = base_sum_ / static_cast<double>(base_n_);
        const double change = short_mean - base_mean;
        if (std::abs(change) >= config_.drop_threshold_db) {
            Pending p;
            p.trigger = count_ - 1;
            p.first = change < 0.0 ? FirstState::Drop : FirstState::Rise;
            p.baseline = base_mean;
            p.wait_until = count_ + budget_n_ + static_cast<std::size_t>(std::llround((config_.release_gap_s + 1.0) * rate_));
            pending_ = p;
        }
        return std::nullopt;
    }

    // Forces stage 2 on a pending trigger at end of stream.
    std::optional<PreambleDetection> flush() {
        if (!pending_) return std::nullopt;
        auto result = stage_two(*pending_);
        pending_.reset();
        return result;
    }

    void reset() {
        buffer_.clear();
        count_ = 0;
        short_sum_ = base_sum_ = 0.0;
        pending_.reset();
    }

    std::size_t samples_seen() const noexcept { return count_; }
    std::size_t stage_two_runs() const noexcept { return stage_two_runs_; }

private:
    struct Pending {
        std::size_t trigger = 0;  // absolute index of the triggering sample
        FirstState first = FirstState::Drop;
        double baseline = 0.0;
        std::size_t wait_until = 0;
    };

    double at(std::size_t absolute) const { return buffer_[absolute - (count_ - buffer_.size())]; }
    double time_of(double absolute_index) const { return t0_ + absolute_index / rate_; }

    std::optional<PreambleDetection> stage_two(const Pending& p) {
        ++stage_two_runs_;
        const std::size_t oldest = count_ - buffer_.size();
        const auto lookback = short_n_ + static_cast<std::size_t>(std::llround(kLookbackS * rate_));
        const std::size_t first = std::max(oldest, p.trigger > lookback ? p.trigger - lookback : 0);
        RssiTrace seg{"", rate_, time_of(static_cast<double>(first)), {}};
        for (std::size_t i = first; i < count_; ++i) seg.samples.push_back(at(i));
        if (seg.size() < 16) return std::nullopt;

        auto dcfg = denoise_;
        dcfg.levels = std::min({dcfg.levels, config_.stage_two_denoise_levels, max_dwt_levels(seg.size())});
        const auto dn = denoise_samples(seg.samples, dcfg);
        RssiTrace clean = seg;
        clean.samples = dn.samples;
        auto ecfg = extractor_;
        if (!ecfg.noise_sigma_db) ecfg.noise_sigma_db = dn.sigma;
        const bool flip = resolve_polarity(p.first);
        const double trigger_t = time_of(static_cast<double>(p.trigger));

        // The train is searched at the selected level first, then every other
        // level from 3 (0.16 s windows at 50 Hz) up. One level per segment is not
        // enough: the drop and release are slow steps that can dominate the
        // scalogram while the up-downs live a few levels finer.
        const int deepest = std::min(ecfg.max_level, max_dwt_levels(clean.size()));
        std::vector<int> levels{resolve_level(clean.samples, ecfg, ecfg.analysis_level)};
        for (int l = std::min(3, deepest); l <= deepest; ++l)
            if (l != levels.front()) levels.push_back(l);
        for (int level : levels) {
            auto edges = detect_edges_at_level(clean, ecfg, level, &seg);
            if (flip) edges = flip_all(std::move(edges));
            if (auto det = find_train(edges, trigger_t, flip, p.baseline)) {
                det->calibration.motion_level = level;
                return det;
            }
        }
        return std::nullopt;
    }

    std::optional<PreambleDetection> find_train(const std::vector<PrimitiveEvent>& edges, double trigger_t, bool flip,
                                                double baseline) const {
        const double budget_end = trigger_t + search_budget_s(config_);
        const auto n = static_cast<std::size_t>(config_.preamble_updown_count);
        for (std::size_t d = 0; d < edges.size(); ++d) {
            // The drop edge is the one that fired stage 1.
            if (edges[d].kind != PrimitiveKind::FallingEdge) continue;
            if (edges[d].start_s > trigger_t) break;
            // drop, n x (up, down), release
            if (d + 2 * n + 1 >= edges.size()) break;
            const double floor = config_.train_min_ratio * edges[d].amplitude_db;
            bool ok = true;
            for (std::size_t k = 0; k < 2 * n && ok; ++k) {
                const auto& e = edges[d + 1 + k];
                const auto want = k % 2 == 0 ? PrimitiveKind::RisingEdge : PrimitiveKind::FallingEdge;
                ok = e.kind == want && e.start_s <= budget_end && e.amplitude_db >= floor;
            }
            if (!ok) continue;

            const auto& drop = edges[d];
            if (edges[d + 1].start_s - drop.end_s < config_.min_hold_s) continue;
            const auto& last = edges[d + 2 * n];
            const auto& release = edges[d + 2 * n + 1];
            if (release.kind != PrimitiveKind::RisingEdge || release.start_s - last.end_s > config_.release_gap_s ||
                release.amplitude_db < floor)
                continue;
            const double end = release.end_s;
            if (!(drop.amplitude_db > 0.0)) continue;

            PreambleDetection det;
            det.start_s = drop.start_s;
            det.hold_start_s = drop.end_s;
            det.hold_end_s = edges[d + 1].start_s;
            det.end_s = end;
            det.calibration.polarity_flipped = flip;
            det.calibration.baseline_rssi_dbm = baseline;
            det.calibration.preamble_drop_db = drop.amplitude_db;
            return det;
        }
        return std::nullopt;
    }

    double rate_;
    SegmenterConfig config_;
    ExtractorConfig extractor_;
    DenoiseConfig denoise_;
    double t0_;
    std::size_t short_n_ = 1, base_n_ = 1, history_n_ = 1, budget_n_ = 1;
    std::deque<double> buffer_;
    std::size_t count_ = 0;
    double short_sum_ = 0.0, base_sum_ = 0.0;
    std::optional<Pending> pending_;
    std::size_t stage_two_runs_ = 0;
};

// First preamble in the trace at or after `from_s`.
inline std::optional<PreambleDetection> detect_preamble(const RssiTrace& trace, const SegmenterConfig& config = {},
                                                        const ExtractorConfig& extractor = {},
                                                        const DenoiseConfig& denoise = {}, double from_s = 0.0) {
    validate_trace(trace);
    const auto first = trace.index_at(from_s);
    PreambleDetector det(trace.sample_rate_hz, config, extractor, denoise, trace.time_at(first));
    for (std::size_t i = first; i < trace.size(); ++i)
        if (auto d = det.push(trace.samples[i])) return d;
    return det.flush();
}

// Every preamble in the trace, scanning resumes after each detection.
inline std::vector<PreambleDetection> detect_all_preambles(const RssiTrace& trace, const SegmenterConfig& config = {},
                                                           const ExtractorConfig& extractor = {},
                                                           const DenoiseConfig& denoise = {}) {
    validate_trace(trace);
    std::vector<PreambleDetection> out;
    double from = trace.start_time_s;
    while (from < trace.end_time_s()) {
        auto d = detect_preamble(trace, config, extractor, denoise, from);
        if (!d) break;
        from = d->end_s + 1.0 / trace.sample_rate_hz;
        out.push_back(*d);
    }
    return out;
}

// Calibration of another AP over a preamble found elsewhere: its own baseline,
// drop and polarity measured over the same time spans.
inline CalibrationProfile calibrate_over(const RssiTrace& denoised, const PreambleDetection& preamble,
                                         const SegmenterConfig& config = {}) {
    validate_trace(denoised);
    const auto b0 = denoised.index_at(preamble.start_s - config.baseline_window_s);
    const auto b1 = std::max(b0 + 1, denoised.index_at(preamble.start_s));
    const auto h0 = denoised.index_at(preamble.hold_start_s);
    const auto h1 = std::max(h0 + 1, denoised.index_at(preamble.hold_end_s));
    const double baseline = seg_detail::mean(denoised.samples, b0, b1);
    const double hold = seg_detail::mean(denoised.samples, h0, h1);
    CalibrationProfile cal = preamble.calibration;
    cal.baseline_rssi_dbm = baseline;
    cal.polarity_flipped = resolve_polarity(hold < baseline ? FirstState::Drop : FirstState::Rise);
    cal.preamble_drop_db = std::max(std::abs(baseline - hold), 1e-6);
    return cal;
}

// At most one window per preamble: it opens at the first edge after the
// preamble and closes once silence_timeout_s passes without a new edge. After
// that the caller goes back to preamble scanning.
inline std::vector<GestureWindow> segment_gestures(const RssiTrace& denoised, double preamble_end_s,
                                                   const CalibrationProfile& calibration,
                                                   const SegmenterConfig& config = {},
                                                   const ExtractorConfig& extractor = {},
                                                   const RssiTrace* raw = nullptr) {
    validate_trace(denoised);
    validate_config(config);
    check_raw_alignment(denoised, raw);
    std::vector<GestureWindow> out;
    const double trace_end = denoised.start_time_s + denoised.duration_s();
    double chunk = std::max(20.0, 4.0 * config.silence_timeout_s);
    while (true) {
        const double chunk_end = std::min(trace_end, preamble_end_s + chunk);
        const auto a = denoised.index_at(preamble_end_s);
        const auto b = denoised.index_at(chunk_end);
        if (b <= a + 1) return out;
        auto cfg = extractor;
        cfg.max_level = std::min(cfg.max_level, std::max(1, max_dwt_levels(b - a)));
        const auto slice = denoised.slice(a, b);
        std::optional<RssiTrace> raw_slice;
        if (raw) raw_slice = raw->slice(a, b);
        const auto edges = detect_edges(slice, cfg, calibration.motion_level, raw_slice ? &*raw_slice : nullptr);

        std::optional<double> open, last_end;
        bool closed = false;
        for (const auto& e : edges) {
            // An edge cut by the slice start, or a release-signed edge right after
            // it, is the tail of the release.
            const bool release_like = e.kind == (calibration.polarity_flipped ? PrimitiveKind::FallingEdge
                                                                              : PrimitiveKind::RisingEdge);
            if (e.start_s <= preamble_end_s + 1.0 / denoised.sample_rate_hz ||
                (!open && release_like && e.mid_s() < preamble_end_s + config.window_pad_s))
                continue;
            if (!open) {
                open = e.start_s;
                last_end = e.end_s;
                continue;
            }
            if (e.start_s - *last_end > config.silence_timeout_s) {
                closed = true;
                break;
            }
            last_end = std::max(*last_end, e.end_s);
        }
        if (!open) {
            if (chunk_end >= trace_end) return out;
            chunk *= 2.0;
            continue;
        }
        if (!closed && *last_end + config.silence_timeout_s > chunk_end && chunk_end < trace_end) {
            chunk *= 2.0;
            continue;
        }
        GestureWindow w;
        w.start_s = std::max(preamble_end_s, *open - config.window_pad_s);
        w.end_s = std::min(trace_end, *last_end + config.window_pad_s);
        w.calibration = calibration;
        w.floor_s = preamble_end_s;
        if (w.end_s > w.start_s) out.push_back(w);
        return out;
    }
}

// When scanning may resume after a window: the silence timeout has to elapse.
inline double window_close_s(const GestureWindow& w, const SegmenterConfig& config) {
    return w.end_s + config.silence_timeout_s;
}

}  // namespace wigest
