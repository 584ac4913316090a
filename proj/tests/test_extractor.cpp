#include <gtest/gtest.h>

#include <random>

#include "wigest/denoiser.hpp"
#include "wigest/extractor.hpp"
#include "wigest/simulator.hpp"

using namespace wigest;

namespace {

struct Prepared {
    RssiTrace raw, clean;
    ExtractorConfig config;
};

Prepared prepare(const RssiTrace& raw, int levels = 7) {
    DenoiseConfig dc;
    dc.levels = std::min(levels, max_dwt_levels(raw.size()));
    const auto d = denoise_samples(raw.samples, dc);
    Prepared p{raw, raw, {}};
    p.clean.samples = d.samples;
    p.config.noise_sigma_db = d.sigma;
    return p;
}

RssiTrace single_gesture(const std::string& family, Speed speed, double sigma, std::uint64_t seed,
                         double duration = 10.0, int count = 1) {
    ScenarioScript s;
    s.duration_s = duration;
    s.seed = seed;
    s.aps = {{"AP1", -40.0, sigma, 1.0, false}};
    s.events.emplace_back(ScriptedGesture{2.0, family, count, speed, Magnitude::High});
    return generate_scenario(s).bundle[0];
}

std::string signs(const std::vector<PrimitiveEvent>& v) {
    std::string s;
    for (const auto& e : v) s += sign_of(e.kind);
    return s;
}

}  // namespace

TEST(Extractor, SlowGestureSelectsCoarserLevel) {
    const auto slow = prepare(single_gesture("Up-Down", Speed::Low, 0.0, 1));
    const auto fast = prepare(single_gesture("Up-Down", Speed::High, 0.0, 1));
    const auto ls = select_analysis_level(slow.clean, 7);
    const auto lf = select_analysis_level(fast.clean, 7);
    EXPECT_FALSE(ls.no_motion);
    EXPECT_GT(ls.level, lf.level);
}

TEST(Extractor, ConstantTraceFallsBackToLevelFive) {
    const RssiTrace t{"A", 50.0, 0.0, std::vector<double>(512, -45.0)};
    const auto sel = select_analysis_level(t, 7);
    EXPECT_TRUE(sel.no_motion);
    EXPECT_EQ(sel.level, 5);
}

TEST(Extractor, TwoSpeedsGiveTwoLevels) {
    // a fast up-down, then a slow one; each half analysed on its own
    ScenarioScript s;
    s.duration_s = 24.0;
    s.aps = {{"AP1", -40.0, 0.0, 1.0, false}};
    s.events.emplace_back(ScriptedGesture{2.0, "Up-Down", 2, Speed::High, Magnitude::High});
    s.events.emplace_back(ScriptedGesture{12.0, "Up-Down", 1, Speed::Low, Magnitude::High});
    const auto t = generate_scenario(s).bundle[0];
    const auto first = t.slice(0, 500), second = t.slice(500, 1200);
    const int a = select_analysis_level(first, 7).level;
    const int b = select_analysis_level(second, 7).level;
    EXPECT_NE(a, b);
    EXPECT_LT(a, b);
}

TEST(Extractor, HandAwayIsOneFastRisingEdge) {
    // 8 dB over 0.5 s: baseline -26.67 gives 0.15 * 53.3 = 8 dB
    ScenarioScript s;
    s.duration_s = 8.0;
    s.aps = {{"AP1", -80.0 + 8.0 / 0.15, 0.0, 1.0, false}};
    s.events.emplace_back(ScriptedGesture{2.0, "Up", 1, Speed::High, Magnitude::High});
    const auto p = prepare(generate_scenario(s).bundle[0]);
    const auto edges = detect_edges(p.clean, p.config, std::nullopt, &p.raw);
    ASSERT_EQ(edges.size(), 1u);
    EXPECT_EQ(edges[0].kind, PrimitiveKind::RisingEdge);
    EXPECT_EQ(edges[0].speed, Speed::High);
    EXPECT_NEAR(edges[0].amplitude_db, 8.0, 0.8);
}

TEST(Extractor, UpDownIsRisingThenFalling) {
    for (Speed sp : {Speed::High, Speed::Medium, Speed::Low}) {
        const auto p = prepare(single_gesture("Up-Down", sp, 0.0, 2));
        const auto edges = detect_edges(p.clean, p.config, std::nullopt, &p.raw);
        EXPECT_EQ(signs(edges), "+-") << to_string(sp);
        if (edges.size() == 2) {
            EXPECT_LT(edges[0].end_s, edges[1].end_s);
        }
    }
}

TEST(Extractor, PureNoiseRarelyYieldsEdges) {
    int clean = 0;
    for (int s = 0; s < 100; ++s) {
        ScenarioScript sc;
        sc.duration_s = 10.0;
        sc.seed = 500 + s;
        sc.aps = {{"AP1", -45.0, 1.0, 1.0, false}};
        const auto p = prepare(generate_scenario(sc).bundle[0]);
        clean += detect_edges(p.clean, p.config, std::nullopt, &p.raw).empty();
    }
    EXPECT_GE(clean, 95);
}

TEST(Extractor, ConstantTraceIsOnePause) {
    const RssiTrace t{"A", 50.0, 0.0, std::vector<double>(150, -45.0)};
    const auto p = detect_pauses(t, ExtractorConfig{});
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0].duration_s(), 3.0, 0.05);
    EXPECT_EQ(p[0].speed, Speed::NA);
    EXPECT_EQ(p[0].magnitude, Magnitude::NA);
}

TEST(Extractor, NoisyConstantHasNoPause) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(-45.0, 2.0);  // variance 4 dB^2
    RssiTrace t{"A", 50.0, 0.0, std::vector<double>(500)};
    for (auto& v : t.samples) v = n(rng);
    EXPECT_TRUE(detect_pauses(t, ExtractorConfig{}).empty());
}

TEST(Extractor, UpPauseDownHasOneSecondPause) {
    const auto p = prepare(single_gesture("Up-Pause-Down", Speed::Medium, 0.0, 4));
    const auto prims = extract_primitives(p.clean, p.config, std::nullopt, &p.raw);
    std::vector<PrimitiveEvent> inner;
    for (const auto& e : prims)
        if (e.is_edge() || (!inner.empty() && inner.back().is_edge())) inner.push_back(e);
    while (!inner.empty() && !inner.back().is_edge()) inner.pop_back();
    ASSERT_EQ(signs(inner), "+0-");
    EXPECT_NEAR(inner[1].duration_s(), 1.0, 0.2);
    EXPECT_GE(inner[1].start_s, inner[0].end_s);
    EXPECT_LE(inner[1].end_s, inner[2].start_s);
}

TEST(Extractor, PrimitivesAreOrderedAndDisjoint) {
    const auto p = prepare(single_gesture("Down-Pause-Up", Speed::Low, 0.5, 5, 14.0));
    const auto prims = extract_primitives(p.clean, p.config, std::nullopt, &p.raw);
    ASSERT_FALSE(prims.empty());
    for (std::size_t i = 0; i < prims.size(); ++i) {
        EXPECT_GT(prims[i].end_s, prims[i].start_s);
        if (i) {
            EXPECT_LE(prims[i - 1].end_s, prims[i].start_s + 1e-9);
        }
        if (prims[i].kind == PrimitiveKind::Pause) {
            EXPECT_GE(prims[i].duration_s(), 0.5 - 1e-9);
        } else {
            EXPECT_EQ(prims[i].speed, speed_from_duration(prims[i].duration_s()));
        }
    }
}

TEST(Extractor, EmptyMotionGivesNothingButPauses) {
    const RssiTrace t{"A", 50.0, 0.0, std::vector<double>(400, -45.0)};
    for (const auto& e : extract_primitives(t, ExtractorConfig{})) EXPECT_EQ(e.kind, PrimitiveKind::Pause);
    EXPECT_TRUE(detect_edges(t, ExtractorConfig{}).empty());
}

TEST(Extractor, MagnitudeFollowsCalibratedDrop) {
    CalibrationProfile cal;
    cal.preamble_drop_db = 10.0;
    const auto make = [&](double amplitude) {
        ScenarioScript s;
        s.duration_s = 8.0;
        s.aps = {{"AP1", -40.0, 0.0, 1.0, false}};
        s.model.high_attenuation_fraction = amplitude / 40.0;
        s.events.emplace_back(ScriptedGesture{2.0, "Up", 1, Speed::Medium, Magnitude::High});
        const auto p = prepare(generate_scenario(s).bundle[0]);
        const auto prims = extract_primitives(p.clean, p.config, cal, &p.raw);
        for (const auto& e : prims)
            if (e.is_edge()) return e.magnitude;
        return Magnitude::NA;
    };
    EXPECT_EQ(make(4.0), Magnitude::Low);
    EXPECT_EQ(make(12.0), Magnitude::High);
}

TEST(Extractor, NoCalibrationMeansNoMagnitude) {
    const auto p = prepare(single_gesture("Up", Speed::High, 0.0, 6));
    for (const auto& e : extract_primitives(p.clean, p.config, std::nullopt, &p.raw)) EXPECT_EQ(e.magnitude, Magnitude::NA);
}

TEST(Extractor, SpeedBucketsAreExact) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(0.01, 4.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = d(rng);
        const Speed want = x < 0.75 ? Speed::High : (x <= 1.5 ? Speed::Medium : Speed::Low);
        ASSERT_EQ(speed_from_duration(x), want) << x;
    }
    EXPECT_EQ(speed_from_duration(0.75), Speed::Medium);
    EXPECT_EQ(speed_from_duration(1.5), Speed::Medium);
}

TEST(Extractor, MonotoneRiseNeverFalls) {
    // SNR >= 10 dB: 6 dB rise, sigma 0.6 dB
    for (int s = 0; s < 200; ++s) {
        const auto p = prepare(single_gesture("Up", static_cast<Speed>(s % 3), 0.6, 900 + s));
        for (const auto& e : detect_edges(p.clean, p.config, std::nullopt, &p.raw))
            ASSERT_NE(e.kind, PrimitiveKind::FallingEdge) << "seed " << 900 + s;
    }
}

TEST(Extractor, OffsetDoesNotChangeEvents) {
    const auto base = single_gesture("Down-Up", Speed::Medium, 0.8, 8, 12.0, 2);
    auto shifted = base;
    for (auto& v : shifted.samples) v += 7.5;
    const auto a = prepare(base), b = prepare(shifted);
    const auto ea = extract_primitives(a.clean, a.config, std::nullopt, &a.raw);
    const auto eb = extract_primitives(b.clean, b.config, std::nullopt, &b.raw);
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i) {
        EXPECT_EQ(ea[i].kind, eb[i].kind);
        EXPECT_NEAR(ea[i].start_s, eb[i].start_s, 1e-6);
        EXPECT_NEAR(ea[i].end_s, eb[i].end_s, 1e-6);
        EXPECT_EQ(ea[i].speed, eb[i].speed);
    }
}

TEST(Extractor, ConfigValidation) {
    ExtractorConfig c;
    c.pause_variance_db2 = 0.0;
    EXPECT_THROW(validate_config(c), Error);
    c = {};
    c.analysis_level = 0;
    EXPECT_THROW(validate_config(c), Error);
}

TEST(Extractor, RawMustAlign) {
    const RssiTrace t{"A", 50.0, 0.0, std::vector<double>(300, -45.0)};
    const RssiTrace shorter{"A", 50.0, 0.0, std::vector<double>(200, -45.0)};
    EXPECT_THROW(detect_edges(t, ExtractorConfig{}, std::nullopt, &shorter), Error);
}
