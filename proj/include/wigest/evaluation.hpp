#pragma once

// Scoring pipeline output against simulator ground truth, plus the Monte-Carlo
// experiments behind the accuracy curves.
//
// A predicted event matches a truth span when the kinds agree and they overlap
// by at least half of the shorter span.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/fusion.hpp"
#include "wigest/pipeline.hpp"
#include "wigest/simulator.hpp"

namespace wigest {

inline constexpr std::string_view kNoneLabel = "none";  // missed (column) or spurious (row)

class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> labels)
        : labels_(std::move(labels)), counts_(labels_.size(), std::vector<long>(labels_.size(), 0)) {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                if (labels_[i] == labels_[j]) fail(ErrorKind::Domain, "duplicate label '" + labels_[i] + "'");
    }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }

    std::size_t index(std::string_view label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        fail(ErrorKind::Domain, "label '" + std::string(label) + "' is not in the matrix");
    }

    void add(std::string_view truth, std::string_view predicted, long n = 1) {
        if (n < 0) fail(ErrorKind::Domain, "negative confusion count");
        counts_[index(truth)][index(predicted)] += n;
    }

    long count(std::size_t truth, std::size_t predicted) const { return counts_.at(truth).at(predicted); }
    long row_total(std::size_t truth) const {
        long s = 0;
        for (long c : counts_.at(truth)) s += c;
        return s;
    }
    // Row-normalised; 0 for an empty row.
    double rate(std::size_t truth, std::size_t predicted) const {
        const long t = row_total(truth);
        return t ? static_cast<double>(count(truth, predicted)) / static_cast<double>(t) : 0.0;
    }
    // Diagonal over everything outside the spurious row.
    double accuracy() const {
        long hit = 0, all = 0;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == kNoneLabel) continue;
            hit += counts_[i][i];
            all += row_total(i);
        }
        return all ? static_cast<double>(hit) / static_cast<double>(all) : 0.0;
    }

    void merge(const ConfusionMatrix& other) {
        if (other.labels_ != labels_) fail(ErrorKind::Domain, "confusion matrices with different labels");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = 0; j < labels_.size(); ++j) counts_[i][j] += other.counts_[i][j];
    }

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<long>> counts_;
};

inline std::vector<std::string> gesture_labels(const TemplateSet& templates = default_templates()) {
    std::vector<std::string> out;
    for (const auto& t : templates.templates()) out.push_back(t.family_name);
    out.emplace_back(kUnknownFamily);
    out.emplace_back(kNoneLabel);
    return out;
}

struct PrimitiveRates {
    long truth = 0;       // truth primitives of this kind
    long detected = 0;    // of those, matched by a prediction
    long predicted = 0;   // predictions of this kind
    long spurious = 0;    // predictions matching no truth primitive

    double tp_rate() const noexcept { return truth ? static_cast<double>(detected) / truth : 0.0; }
    double fp_rate() const noexcept { return predicted ? static_cast<double>(spurious) / predicted : 0.0; }
};

struct CurvePoint {
    double x = 0.0;
    double accuracy = 0.0;
    long trials = 0;
};

struct EvalReport {
    std::map<PrimitiveKind, PrimitiveRates> primitives;
    ConfusionMatrix gestures{gesture_labels()};
    std::vector<int> count_errors;          // |predicted - true| per correctly matched gesture
    std::vector<double> frequency_errors_s; // |1/f_pred - 1/f_true|, repeated gestures only
    long preamble_false_detections = 0;
    double hours = 0.0;
    std::vector<CurvePoint> accuracy_vs_sigma;
    std::vector<CurvePoint> accuracy_vs_aps;
    long scenarios = 0;

    double false_preambles_per_hour() const { return hours > 0.0 ? preamble_false_detections / hours : 0.0; }
    double exact_count_rate() const {
        if (count_errors.empty()) return 0.0;
        return static_cast<double>(std::count(count_errors.begin(), count_errors.end(), 0)) /
               static_cast<double>(count_errors.size());
    }
    double frequency_within(double seconds) const {
        if (frequency_errors_s.empty()) return 0.0;
        return static_cast<double>(std::count_if(frequency_errors_s.begin(), frequency_errors_s.end(),
                                                 [&](double e) { return e <= seconds; })) /
               static_cast<double>(frequency_errors_s.size());
    }
};

// Empirical CDF: sorted distinct values with P(X <= value).
template <typename T>
std::vector<std::pair<T, double>> empirical_cdf(std::vector<T> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<T, double>> out;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        out.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

// Period error of a repeated gesture; infinite when no frequency was measured.
inline double frequency_error_s(double predicted_hz, double true_hz) {
    if (!(predicted_hz > 0.0) || !(true_hz > 0.0)) return std::numeric_limits<double>::infinity();
    return std::abs(1.0 / predicted_hz - 1.0 / true_hz);
}

inline double true_frequency_hz(const TruthSpan& gesture) {
    if (gesture.count < 2 || !(gesture.end_s > gesture.start_s)) return 0.0;
    return gesture.count / (gesture.end_s - gesture.start_s);
}

namespace eval_detail {

inline bool spans_match(double a0, double a1, double b0, double b1) { return overlap_fraction(a0, a1, b0, b1) >= 0.5; }

// Greedy one-to-one matching in time order; returns, per truth span, the index
// of its prediction.
template <typename P, typename Same>
std::vector<std::optional<std::size_t>> match_spans(const std::vector<const TruthSpan*>& truth,
                                                    const std::vector<P>& predicted, Same same) {
    std::vector<std::optional<std::size_t>> out(truth.size());
    std::vector<char> used(predicted.size(), 0);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        double best = 0.0;
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            if (used[p] || !same(*truth[t], predicted[p])) continue;
            const double f = overlap_fraction(truth[t]->start_s, truth[t]->end_s, predicted[p].start_s, predicted[p].end_s);
            if (f >= 0.5 && f > best) {
                best = f;
                out[t] = p;
            }
        }
        if (out[t]) used[*out[t]] = 1;
    }
    return out;
}

}  // namespace eval_detail

// Adds one scenario's outcome to `report`. Both inputs are order-free: truth
// spans and windows are matched by time, never by position.
inline void score_scenario(EvalReport& report, const GroundTruth& truth, const PipelineResult& result,
                           double duration_s) {
    ++report.scenarios;
    report.hours += duration_s / 3600.0;

    // gestures
    auto gestures = truth.of_type(SpanType::Gesture);
    std::sort(gestures.begin(), gestures.end(),
              [](const TruthSpan* a, const TruthSpan* b) { return a->start_s < b->start_s; });
    std::vector<GestureEvent> predicted = result.gestures;
    std::sort(predicted.begin(), predicted.end(),
              [](const GestureEvent& a, const GestureEvent& b) { return a.start_s < b.start_s; });
    const auto exact = eval_detail::match_spans(gestures, predicted, [](const TruthSpan& t, const GestureEvent& g) {
        return g.family_name == t.label;
    });
    std::vector<char> used(predicted.size(), 0);
    for (auto m : exact)
        if (m) used[*m] = 1;
    for (std::size_t t = 0; t < gestures.size(); ++t) {
        const auto& g = *gestures[t];
        if (exact[t]) {
            const auto& p = predicted[*exact[t]];
            report.gestures.add(g.label, g.label);
            report.count_errors.push_back(std::abs(p.count - g.count));
            if (g.count >= 2) report.frequency_errors_s.push_back(frequency_error_s(p.frequency_hz, true_frequency_hz(g)));
            continue;
        }
        // A wrong family still counts as a confusion if its span lines up.
        std::optional<std::size_t> near;
        double best = 0.0;
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            if (used[p]) continue;
            const double f = overlap_fraction(g.start_s, g.end_s, predicted[p].start_s, predicted[p].end_s);
            if (f >= 0.5 && f > best) {
                best = f;
                near = p;
            }
        }
        if (near) {
            used[*near] = 1;
            report.gestures.add(g.label, predicted[*near].family_name);
        } else {
            report.gestures.add(g.label, kNoneLabel);
        }
    }
    for (std::size_t p = 0; p < predicted.size(); ++p)
        if (!used[p]) report.gestures.add(kNoneLabel, predicted[p].family_name);

    // primitives inside gestures (preamble motions are not scored)
    std::vector<const TruthSpan*> prims;
    for (const auto& s : truth.spans)
        if (s.type == SpanType::Primitive && s.parent >= 0 && truth.spans[s.parent].type == SpanType::Gesture)
            prims.push_back(&s);
    std::sort(prims.begin(), prims.end(), [](const TruthSpan* a, const TruthSpan* b) { return a->start_s < b->start_s; });
    std::vector<PrimitiveEvent> fused;
    for (const auto& w : result.windows) fused.insert(fused.end(), w.fused.begin(), w.fused.end());
    std::sort(fused.begin(), fused.end(),
              [](const PrimitiveEvent& a, const PrimitiveEvent& b) { return a.start_s < b.start_s; });
    const auto pm = eval_detail::match_spans(prims, fused, [](const TruthSpan& t, const PrimitiveEvent& e) {
        return t.label.size() == 1 && t.label[0] == sign_of(e.kind);
    });
    std::vector<char> hit(fused.size(), 0);
    for (std::size_t t = 0; t < prims.size(); ++t) {
        auto& r = report.primitives[kind_from_sign(prims[t]->label.at(0))];
        ++r.truth;
        if (pm[t]) {
            ++r.detected;
            hit[*pm[t]] = 1;
        }
    }
    for (std::size_t p = 0; p < fused.size(); ++p) {
        auto& r = report.primitives[fused[p].kind];
        ++r.predicted;
        if (!hit[p]) ++r.spurious;
    }

    // preambles that do not line up with a scripted one
    const auto truth_pre = truth.of_type(SpanType::Preamble);
    for (const auto& d : result.preambles) {
        const bool real = std::any_of(truth_pre.begin(), truth_pre.end(), [&](const TruthSpan* t) {
            return overlap_fraction(t->start_s, t->end_s, d.start_s, d.end_s) > 0.0;
        });
        if (!real) ++report.preamble_false_detections;
    }
}

// --- Monte-Carlo experiments ------------------------------------------------
//
// Every trial draws from its own seeded stream, so runs are reproducible and two
// experiments with the same seed see the same gestures and gains (only the noise
// amplitude differs). That common randomness keeps the bisection in
// calibrate_sigma from chasing sampling noise.

struct TrialSetup {
    double baseline_dbm = -40.0;
    PipelineConfig pipeline;
    SimulatorModel model;
};

namespace eval_detail {

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t salt, std::uint64_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(i),
                      static_cast<std::uint32_t>(i >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Speed any_speed(std::mt19937_64& rng) {
    return static_cast<Speed>(std::uniform_int_distribution<int>(0, 2)(rng));
}

struct DenoisedAp {
    RssiTrace raw, clean;
    ExtractorConfig extractor;
};

inline DenoisedAp denoise_ap(const RssiTrace& raw, const PipelineConfig& config) {
    auto dcfg = config.denoise;
    dcfg.levels = std::min(dcfg.levels, max_dwt_levels(raw.size()));
    auto d = denoise_samples(raw.samples, dcfg);
    DenoisedAp out{raw, raw, config.extractor};
    out.clean.samples = std::move(d.samples);
    if (!out.extractor.noise_sigma_db) out.extractor.noise_sigma_db = d.sigma;
    return out;
}

}  // namespace eval_detail

struct PrimitiveTrialResult {
    long trials = 0;
    long correct = 0;
    std::map<PrimitiveKind, PrimitiveRates> rates;
    double accuracy() const noexcept { return trials ? static_cast<double>(correct) / trials : 0.0; }
};

// Isolated edge trials: one rising or falling motion at a random speed, seen by
// `ap_count` APs with independent gains and noise. Each AP's edges are
// extracted over the whole trace; with several APs they are fused by majority
// vote. A trial is correct when exactly one edge survives, of the right kind
// and overlapping the true motion.
inline PrimitiveTrialResult primitive_trials(double sigma_db, int ap_count, long trials, std::uint64_t seed,
                                             const TrialSetup& setup = {}) {
    if (ap_count < 1) fail(ErrorKind::Domain, "need at least one AP");
    if (trials < 1) fail(ErrorKind::Domain, "need at least one trial");
    if (!(sigma_db >= 0.0)) fail(ErrorKind::Domain, "noise sigma must be >= 0");
    PrimitiveTrialResult out;
    for (long i = 0; i < trials; ++i) {
        const auto s = eval_detail::trial_seed(seed, 0x9e1, static_cast<std::uint64_t>(i));
        std::mt19937_64 rng(s);
        const bool up = std::bernoulli_distribution(0.5)(rng);
        const Speed speed = eval_detail::any_speed(rng);

        ScenarioScript script;
        script.seed = s;
        script.duration_s = 7.0;
        script.model = setup.model;
        for (int a = 0; a < ap_count; ++a)
            script.aps.push_back({"AP" + std::to_string(a + 1), setup.baseline_dbm, sigma_db, std::nullopt, false});
        script.events.emplace_back(ScriptedGesture{2.0, up ? "Up" : "Down", 1, speed, Magnitude::High});
        const auto scn = generate_scenario(script);
        const auto truth = scn.truth.of_type(SpanType::Primitive).at(0);

        std::vector<ApEvents> streams;
        for (std::size_t a = 0; a < scn.bundle.size(); ++a) {
            const auto ap = eval_detail::denoise_ap(scn.bundle[a], setup.pipeline);
            streams.push_back({ap.raw.ap_id, scn.bundle.mean_rssi(a),
                               detect_edges(ap.clean, ap.extractor, std::nullopt, &ap.raw)});
        }
        const auto fused = fuse_events(streams);
        const auto kind = up ? PrimitiveKind::RisingEdge : PrimitiveKind::FallingEdge;

        auto& r = out.rates[kind];
        ++r.truth;
        bool found = false;
        for (const auto& e : fused) {
            ++out.rates[e.kind].predicted;
            const bool same = !found && e.kind == kind &&
                              eval_detail::spans_match(truth->start_s, truth->end_s, e.start_s, e.end_s);
            if (same) {
                found = true;
                ++r.detected;
            } else {
                ++out.rates[e.kind].spurious;
            }
        }
        ++out.trials;
        if (found && fused.size() == 1) ++out.correct;
    }
    return out;
}

struct CalibrationResult {
    double sigma_db = 0.0;
    double accuracy = 0.0;
    int iterations = 0;
};

// Bisection for the single-AP noise level whose primitive accuracy is `target`.
// Accuracy falls with sigma, so the bracket shrinks towards the crossing.
inline CalibrationResult calibrate_sigma(double target, long trials, std::uint64_t seed, const TrialSetup& setup = {},
                                         double lo = 0.25, double hi = 16.0, int iterations = 10) {
    if (!(target > 0.0 && target < 1.0)) fail(ErrorKind::Domain, "target accuracy must lie in (0, 1)");
    if (!(lo >= 0.0 && hi > lo)) fail(ErrorKind::Domain, "bad sigma bracket");
    const auto acc = [&](double s) { return primitive_trials(s, 1, trials, seed, setup).accuracy(); };
    double a_lo = acc(lo), a_hi = acc(hi);
    if (a_lo < target) return {lo, a_lo, 0};
    if (a_hi > target) return {hi, a_hi, 0};
    CalibrationResult best{lo, a_lo, 0};
    for (int it = 1; it <= iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double a = acc(mid);
        if (std::abs(a - target) < std::abs(best.accuracy - target)) best = {mid, a, it};
        if (a >= target) lo = mid;
        else hi = mid;
        best.iterations = it;
    }
    return best;
}

inline std::vector<CurvePoint> accuracy_vs_sigma(const std::vector<double>& sigmas, int ap_count, long trials,
                                                 std::uint64_t seed, const TrialSetup& setup = {}) {
    std::vector<CurvePoint> out;
    for (double s : sigmas) {
        const auto r = primitive_trials(s, ap_count, trials, seed, setup);
        out.push_back({s, r.accuracy(), r.trials});
    }
    return out;
}

inline std::vector<CurvePoint> accuracy_vs_aps(double sigma_db, const std::vector<int>& ap_counts, long trials,
                                               std::uint64_t seed, const TrialSetup& setup = {}) {
    std::vector<CurvePoint> out;
    for (int n : ap_counts) {
        const auto r = primitive_trials(sigma_db, n, trials, seed, setup);
        out.push_back({static_cast<double>(n), r.accuracy(), r.trials});
    }
    return out;
}

struct CountTrialResult {
    long trials = 0;
    std::vector<int> count_errors;          // every trial; a wrong family counts as count 0
    std::vector<double> frequency_errors_s; // trials with true count >= 2
    double exact_count_rate() const {
        if (count_errors.empty()) return 0.0;
        return static_cast<double>(std::count(count_errors.begin(), count_errors.end(), 0)) / count_errors.size();
    }
    double frequency_within(double seconds) const {
        if (frequency_errors_s.empty()) return 0.0;
        return static_cast<double>(std::count_if(frequency_errors_s.begin(), frequency_errors_s.end(),
                                                 [&](double e) { return e <= seconds; })) /
               frequency_errors_s.size();
    }
};

// Repeated up-down / down-up gestures (count 1..max_count, random speed) with
// segmentation taken from the ground truth, so only the per-window extraction,
// fusion and matching are measured.
inline CountTrialResult count_trials(double sigma_db, int ap_count, long trials, std::uint64_t seed,
                                     int max_count = 3, const TrialSetup& setup = {}) {
    if (ap_count < 1 || trials < 1 || max_count < 1) fail(ErrorKind::Domain, "bad count trial parameters");
    CountTrialResult out;
    for (long i = 0; i < trials; ++i) {
        const auto s = eval_detail::trial_seed(seed, 0xc0c, static_cast<std::uint64_t>(i));
        std::mt19937_64 rng(s);
        const std::string family = std::bernoulli_distribution(0.5)(rng) ? "Up-Down" : "Down-Up";
        const int count = std::uniform_int_distribution<int>(1, max_count)(rng);
        const Speed speed = eval_detail::any_speed(rng);

        ScenarioScript script;
        script.seed = s;
        script.model = setup.model;
        const double start = 2.0;
        script.duration_s = start + count * 2.0 * setup.model.ramp_s(speed) + 4.0;
        for (int a = 0; a < ap_count; ++a)
            script.aps.push_back({"AP" + std::to_string(a + 1), setup.baseline_dbm, sigma_db, std::nullopt, false});
        script.events.emplace_back(ScriptedGesture{start, family, count, speed, Magnitude::High});
        const auto scn = generate_scenario(script);
        const auto& truth = *scn.truth.of_type(SpanType::Gesture).at(0);

        GestureWindow w;
        w.start_s = truth.start_s - setup.pipeline.segmenter.window_pad_s;
        w.end_s = truth.end_s + setup.pipeline.segmenter.window_pad_s;
        w.calibration.baseline_rssi_dbm = setup.baseline_dbm;
        w.calibration.preamble_drop_db = setup.model.amplitude_db(Magnitude::High, setup.baseline_dbm);
        std::vector<ApEvents> streams;
        for (std::size_t a = 0; a < scn.bundle.size(); ++a) {
            const auto ap = eval_detail::denoise_ap(scn.bundle[a], setup.pipeline);
            streams.push_back({ap.raw.ap_id, scn.bundle.mean_rssi(a), window_primitives(w, ap.clean, ap.extractor, &ap.raw)});
        }
        const auto fused = trim_pauses(fuse_events(streams));
        const auto g = match(encode(fused), default_templates(), fused);
        const int got = g.family_name == family ? g.count : 0;
        ++out.trials;
        out.count_errors.push_back(std::abs(got - count));
        if (count >= 2)
            out.frequency_errors_s.push_back(g.family_name == family ? frequency_error_s(g.frequency_hz, true_frequency_hz(truth))
                                                                     : std::numeric_limits<double>::infinity());
    }
    return out;
}

// A gesture-free corpus of `duration_s`: noise plus interference bursts (random
// walks and reduced-amplitude human-like motion) spaced at random.
inline ScenarioScript interference_script(double duration_s, double sigma_db, std::uint64_t seed, int ap_count = 1,
                                          double baseline_dbm = -40.0) {
    ScenarioScript script;
    script.seed = seed;
    script.duration_s = duration_s;
    for (int a = 0; a < ap_count; ++a)
        script.aps.push_back({"AP" + std::to_string(a + 1), baseline_dbm, sigma_db, std::nullopt, false});
    std::mt19937_64 rng(eval_detail::trial_seed(seed, 0x1fe, 0));
    std::uniform_real_distribution<double> gap(2.0, 20.0), len(2.0, 12.0), amp(2.0, 6.0);
    double t = gap(rng);
    bool human = false;
    while (true) {
        const double d = len(rng);
        if (t + d > duration_s - 1.0) break;
        ScriptedInterference burst;
        burst.start_s = t;
        burst.duration_s = d;
        burst.amplitude_db = amp(rng);
        burst.shape = human ? InterferenceShape::Humanlike : InterferenceShape::RandomWalk;
        script.events.emplace_back(burst);
        human = !human;
        t += d + gap(rng);
    }
    return script;
}

// Preambles found in a gesture-free corpus; every one is false.
inline long preamble_false_detections(const ScenarioScript& corpus, int updown_count, const PipelineConfig& base = {}) {
    const auto scn = generate_scenario(corpus);
    auto seg = base.segmenter;
    seg.preamble_updown_count = updown_count;
    const auto& raw = scn.bundle[scn.bundle.strongest()];
    return static_cast<long>(detect_all_preambles(raw, seg, base.extractor, base.denoise).size());
}

// --- report writers ---------------------------------------------------------

inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
    out << "truth\\predicted";
    for (const auto& l : m.labels()) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.labels()[i];
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << m.count(i, j);
        out << '\n';
    }
}

inline void write_primitive_rates_csv(std::ostream& out, const std::map<PrimitiveKind, PrimitiveRates>& rates) {
    out << "kind,truth,detected,predicted,spurious,tp_rate,fp_rate\n";
    for (const auto& [k, r] : rates)
        out << to_string(k) << ',' << r.truth << ',' << r.detected << ',' << r.predicted << ',' << r.spurious << ','
            << detail::fixed4(r.tp_rate()) << ',' << detail::fixed4(r.fp_rate()) << '\n';
}

template <typename T>
void write_cdf_csv(std::ostream& out, const std::string& column, const std::vector<T>& values) {
    out << column << ",cdf\n";
    for (const auto& [v, p] : empirical_cdf(values)) {
        if constexpr (std::is_floating_point_v<T>)
            out << (std::isfinite(v) ? detail::fixed4(v) : std::string("inf")) << ',' << detail::fixed4(p) << '\n';
        else
            out << v << ',' << detail::fixed4(p) << '\n';
    }
}

inline void write_curve_csv(std::ostream& out, const std::string& column, const std::vector<CurvePoint>& curve) {
    out << column << ",accuracy,trials\n";
    for (const auto& p : curve) out << detail::fixed4(p.x) << ',' << detail::fixed4(p.accuracy) << ',' << p.trials << '\n';
}

inline void write_report_text(std::ostream& out, const EvalReport& r) {
    out << "scenarios: " << r.scenarios << "\n";
    out << "hours: " << detail::fixed4(r.hours) << "\n";
    out << "gesture accuracy: " << detail::fixed4(r.gestures.accuracy()) << "\n";
    out << "primitives:\n";
    for (const auto& [k, p] : r.primitives)
        out << "  " << to_string(k) << ": tp " << detail::fixed4(p.tp_rate()) << " fp " << detail::fixed4(p.fp_rate())
            << " (" << p.truth << " true, " << p.predicted << " predicted)\n";
    out << "exact count: " << detail::fixed4(r.exact_count_rate()) << " of " << r.count_errors.size() << "\n";
    out << "frequency within 1 s: " << detail::fixed4(r.frequency_within(1.0)) << " of " << r.frequency_errors_s.size()
        << "\n";
    out << "false preambles: " << r.preamble_false_detections << " (" << detail::fixed4(r.false_preambles_per_hour())
        << " per hour)\n";
    if (!r.accuracy_vs_sigma.empty()) {
        out << "accuracy vs sigma:\n";
        for (const auto& p : r.accuracy_vs_sigma)
            out << "  " << detail::fixed4(p.x) << " dB: " << detail::fixed4(p.accuracy) << "\n";
    }
    if (!r.accuracy_vs_aps.empty()) {
        out << "accuracy vs APs:\n";
        for (const auto& p : r.accuracy_vs_aps)
            out << "  " << static_cast<int>(p.x) << ": " << detail::fixed4(p.accuracy) << "\n";
    }
    out << "confusion (row = truth, " << kNoneLabel << " = missed / spurious):\n";
    for (std::size_t i = 0; i < r.gestures.size(); ++i) {
        if (r.gestures.row_total(i) == 0) continue;
        out << "  " << r.gestures.labels()[i] << ":";
        for (std::size_t j = 0; j < r.gestures.size(); ++j)
            if (r.gestures.count(i, j)) out << ' ' << r.gestures.labels()[j] << '=' << r.gestures.count(i, j);
        out << "\n";
    }
}

}  // namespace wigest
