#include <gtest/gtest.h>

#include "wigest/denoiser.hpp"
#include "wigest/segmenter.hpp"
#include "wigest/simulator.hpp"

using namespace wigest;

namespace {

ScenarioScript preamble_script(double sigma, std::uint64_t seed, bool flipped = false, double drop = 8.0) {
    ScenarioScript s;
    s.duration_s = 30.0;
    s.seed = seed;
    s.aps = {{"AP1", -40.0, sigma, 1.0, flipped}};
    s.events.emplace_back(ScriptedPreamble{3.0, drop});
    return s;
}

}  // namespace

TEST(Segmenter, PolarityFromFirstState) {
    EXPECT_FALSE(resolve_polarity(FirstState::Drop));
    EXPECT_TRUE(resolve_polarity(FirstState::Rise));
}

TEST(Segmenter, RejectsBadConfig) {
    SegmenterConfig c;
    c.drop_threshold_db = 0.0;
    EXPECT_THROW(validate_config(c), Error);
    c = {};
    c.preamble_updown_count = 0;
    EXPECT_THROW(validate_config(c), Error);
    c = {};
    c.silence_timeout_s = -1.0;
    EXPECT_THROW(validate_config(c), Error);
    EXPECT_NO_THROW(validate_config(SegmenterConfig{}));
}

TEST(Segmenter, DetectsEightDbPreamble) {
    int found = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto raw = generate_scenario(preamble_script(0.5, seed)).bundle[0];
        const auto d = detect_preamble(raw);
        if (!d) continue;
        ++found;
        EXPECT_NEAR(d->calibration.preamble_drop_db, 8.0, 1.5) << "seed " << seed;
        EXPECT_FALSE(d->calibration.polarity_flipped);
        EXPECT_NEAR(d->start_s, 3.0, 0.5);
        EXPECT_GT(d->end_s, d->hold_end_s);
        EXPECT_GT(d->hold_end_s, d->hold_start_s);
    }
    EXPECT_EQ(found, 10);
}

TEST(Segmenter, InvertedApReportsFlippedPolarity) {
    const auto raw = generate_scenario(preamble_script(0.5, 3, true)).bundle[0];
    const auto d = detect_preamble(raw);
    ASSERT_TRUE(d);
    EXPECT_TRUE(d->calibration.polarity_flipped);
    EXPECT_NEAR(d->calibration.preamble_drop_db, 8.0, 1.5);
}

TEST(Segmenter, NoPreambleInQuietTrace) {
    ScenarioScript s;
    s.duration_s = 60.0;
    s.seed = 4;
    s.aps = {{"AP1", -40.0, 1.0, 1.0, false}};
    EXPECT_FALSE(detect_preamble(generate_scenario(s).bundle[0]));
}

TEST(Segmenter, SingleUpDownIsNotAPreamble) {
    SegmenterConfig cfg;
    cfg.preamble_updown_count = 2;
    ScenarioScript s;
    s.duration_s = 30.0;
    s.seed = 5;
    s.aps = {{"AP1", -40.0, 0.5, 1.0, false}};
    ScriptedPreamble p{3.0, 8.0};
    p.updown_count = 1;
    s.events.emplace_back(p);
    EXPECT_FALSE(detect_preamble(generate_scenario(s).bundle[0], cfg));
}

TEST(Segmenter, FindsEveryPreamble) {
    auto s = preamble_script(0.5, 6);
    s.duration_s = 60.0;
    s.events.emplace_back(ScriptedPreamble{30.0, 8.0});
    const auto all = detect_all_preambles(generate_scenario(s).bundle[0]);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_NEAR(all[0].start_s, 3.0, 0.5);
    EXPECT_NEAR(all[1].start_s, 30.0, 0.5);
}

TEST(Segmenter, OneWindowPerPreamble) {
    auto s = preamble_script(0.5, 7);
    s.events.emplace_back(ScriptedGesture{13.0, "Up-Down", 1, Speed::High, Magnitude::High});
    // Well past the silence timeout: belongs to no window.
    s.events.emplace_back(ScriptedGesture{22.0, "Down-Up", 1, Speed::High, Magnitude::High});
    const auto scn = generate_scenario(s);
    const auto& raw = scn.bundle[0];
    const auto pre = detect_preamble(raw);
    ASSERT_TRUE(pre);
    const auto clean = denoise(raw);
    const auto windows = segment_gestures(clean, pre->end_s, pre->calibration, {}, {}, &raw);
    ASSERT_EQ(windows.size(), 1u);
    const auto& w = windows[0];
    EXPECT_LE(w.start_s, 13.0);
    EXPECT_GE(w.end_s, 14.0);
    EXPECT_LT(w.end_s, 22.0);
    EXPECT_DOUBLE_EQ(w.floor_s, pre->end_s);
    EXPECT_DOUBLE_EQ(window_close_s(w, {}), w.end_s + SegmenterConfig{}.silence_timeout_s);
}

TEST(Segmenter, NoWindowWithoutMotion) {
    const auto scn = generate_scenario(preamble_script(0.5, 8));
    const auto& raw = scn.bundle[0];
    const auto pre = detect_preamble(raw);
    ASSERT_TRUE(pre);
    const auto clean = denoise(raw);
    EXPECT_TRUE(segment_gestures(clean, pre->end_s, pre->calibration, {}, {}, &raw).empty());
}

TEST(Segmenter, CalibratesSecondApOverSameSpans) {
    auto s = preamble_script(0.5, 9);
    s.aps.push_back({"AP2", -50.0, 0.5, 1.0, true});
    s.events[0] = ScriptedPreamble{3.0, std::nullopt};
    const auto scn = generate_scenario(s);
    const auto pre = detect_preamble(scn.bundle[0]);
    ASSERT_TRUE(pre);
    const auto cal = calibrate_over(denoise(scn.bundle[1]), *pre);
    EXPECT_TRUE(cal.polarity_flipped);
    EXPECT_NEAR(cal.baseline_rssi_dbm, -50.0, 1.0);
    // High magnitude: 15% of the 30 dB headroom above the floor.
    EXPECT_NEAR(cal.preamble_drop_db, 4.5, 1.0);
}

TEST(Segmenter, StreamingMatchesBatch) {
    const auto raw = generate_scenario(preamble_script(0.5, 10)).bundle[0];
    const auto batch = detect_preamble(raw);
    ASSERT_TRUE(batch);
    PreambleDetector det(raw.sample_rate_hz, {}, {}, {}, raw.start_time_s);
    std::optional<PreambleDetection> streamed;
    for (double x : raw.samples)
        if ((streamed = det.push(x))) break;
    if (!streamed) streamed = det.flush();
    ASSERT_TRUE(streamed);
    EXPECT_DOUBLE_EQ(streamed->start_s, batch->start_s);
    EXPECT_DOUBLE_EQ(streamed->end_s, batch->end_s);
    EXPECT_GT(det.stage_two_runs(), 0u);
}
