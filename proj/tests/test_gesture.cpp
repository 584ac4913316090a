#include <gtest/gtest.h>

#include <random>

#include "wigest/denoiser.hpp"
#include "wigest/gesture.hpp"
#include "wigest/simulator.hpp"

using namespace wigest;

namespace {

PrimitiveEvent prim(char sign, double start, double end) {
    PrimitiveEvent p;
    p.kind = kind_from_sign(sign);
    p.start_s = start;
    p.end_s = end;
    if (p.is_edge()) {
        p.speed = speed_from_duration(end - start);
        p.magnitude = Magnitude::High;
        p.amplitude_db = 5.0;
    }
    return p;
}

std::vector<PrimitiveEvent> from_string(const std::string& s, double step = 0.5) {
    std::vector<PrimitiveEvent> out;
    double t = 0.0;
    for (char c : s) {
        out.push_back(prim(c, t, t + step));
        t += step;
    }
    return out;
}

struct Rendered {
    RssiTrace raw, clean;
    ExtractorConfig config;
};

Rendered render(const std::string& family, int count, Speed speed, std::uint64_t seed, double sigma = 0.0) {
    ScenarioScript s;
    s.duration_s = 20.0;
    s.seed = seed;
    s.aps = {{"AP1", -40.0, sigma, 1.0, false}};
    s.events.emplace_back(ScriptedGesture{3.0, family, count, speed, Magnitude::High});
    Rendered r;
    r.raw = generate_scenario(s).bundle[0];
    r.clean = r.raw;
    const auto d = denoise_samples(r.raw.samples, DenoiseConfig{});
    r.clean.samples = d.samples;
    r.config.noise_sigma_db = d.sigma;
    return r;
}

GestureWindow window(double start, double end) {
    GestureWindow w;
    w.start_s = start;
    w.end_s = end;
    return w;
}

}  // namespace

TEST(Templates, DefaultsMatchShippedFile) {
    const auto shipped = load_templates(WIGEST_DATA_DIR "/templates.csv");
    EXPECT_EQ(shipped.templates(), default_templates().templates());
}

TEST(Templates, RejectsBadTables) {
    EXPECT_THROW(parse_templates("A,+,false\nB,+,false\n"), Error);
    EXPECT_THROW(parse_templates("A,+,false\nA,-,false\n"), Error);
    EXPECT_THROW(parse_templates("A,+x,false\n"), Error);
    EXPECT_THROW(parse_templates("A,+,maybe\n"), Error);
    EXPECT_THROW(parse_templates("unknown,+,false\n"), Error);
    EXPECT_THROW(parse_templates("# only a comment\n"), Error);
    EXPECT_THROW(load_templates("/nonexistent/templates.csv"), Error);
}

TEST(Gesture, EncodesSigns) {
    const auto p = from_string("+0-");
    EXPECT_EQ(encode(p), "+0-");
    EXPECT_EQ(encode(p, true), "-0+");
    EXPECT_EQ(swap_signs("+-0+"), "-+0-");
}

TEST(Gesture, FlipIsAnInvolutionAndCommutesWithEncode) {
    std::mt19937_64 rng(11);
    const char alphabet[] = {'+', '-', '0'};
    for (int i = 0; i < 1000; ++i) {
        std::string s(1 + rng() % 12, '+');
        for (char& c : s) c = alphabet[rng() % 3];
        const auto p = from_string(s);
        EXPECT_EQ(flip_all(flip_all(p)), p);
        EXPECT_EQ(encode(flip_all(p)), swap_signs(encode(p)));
        EXPECT_EQ(encode(p, true), encode(flip_all(p)));
    }
}

TEST(Gesture, MatchesEachTemplateExactly) {
    for (const auto& t : default_templates().templates()) {
        const auto m = best_match(t.pattern, default_templates());
        ASSERT_TRUE(m.tmpl) << t.family_name;
        EXPECT_EQ(m.tmpl->family_name, t.family_name);
        EXPECT_EQ(m.count, 1);
    }
}

TEST(Gesture, RepeatableFamiliesCount) {
    auto m = best_match("+-+-+-", default_templates());
    ASSERT_TRUE(m.tmpl);
    EXPECT_EQ(m.tmpl->family_name, "Up-Down");
    EXPECT_EQ(m.count, 3);
    m = best_match("-+-+", default_templates());
    ASSERT_TRUE(m.tmpl);
    EXPECT_EQ(m.tmpl->family_name, "Down-Up");
    EXPECT_EQ(m.count, 2);
}

TEST(Gesture, NonRepeatableOrPartialIsUnknown) {
    for (const char* s : {"++", "--", "+0-+0-", "+-+", "0", "", "+00-"}) {
        const auto g = match(s, default_templates());
        EXPECT_FALSE(g.known()) << s;
        EXPECT_EQ(g.family_name, kUnknownFamily);
    }
}

TEST(Gesture, InfinityIsItsOwnFamily) {
    const auto g = match("-+-", default_templates());
    EXPECT_EQ(g.family_name, "Infinity");
    EXPECT_EQ(g.count, 1);
}

TEST(Gesture, FrequencyFromRepetitionStarts) {
    // Five up-downs, one per second.
    const auto p = from_string("+-+-+-+-+-", 0.5);
    const auto g = match(encode(p), default_templates(), p);
    EXPECT_EQ(g.family_name, "Up-Down");
    EXPECT_EQ(g.count, 5);
    EXPECT_DOUBLE_EQ(g.frequency_hz, 1.0);
    EXPECT_DOUBLE_EQ(g.start_s, 0.0);
    EXPECT_DOUBLE_EQ(g.end_s, 5.0);
    EXPECT_EQ(g.speed, Speed::High);
}

TEST(Gesture, SingleRepetitionHasNoFrequency) {
    const auto p = from_string("+-");
    EXPECT_DOUBLE_EQ(match(encode(p), default_templates(), p).frequency_hz, 0.0);
}

TEST(Gesture, MismatchedPrimitivesThrow) {
    EXPECT_THROW(match("+-", default_templates(), from_string("+")), Error);
}

TEST(Gesture, TrimPausesKeepsInnerPauses) {
    const auto p = trim_pauses(from_string("00+0-0"));
    EXPECT_EQ(encode(p), "+0-");
    EXPECT_TRUE(trim_pauses(from_string("00")).empty());
}

TEST(Gesture, FiveUpDownsAtOneHertz) {
    const auto r = render("Up-Down", 5, Speed::High, 21);
    const auto g = classify_window(window(2.5, 13.5), r.clean, default_templates(), r.config, &r.raw);
    EXPECT_EQ(g.family_name, "Up-Down");
    EXPECT_EQ(g.count, 5);
    EXPECT_NEAR(g.frequency_hz, 1.0, 0.2);
}

TEST(Gesture, DownPauseUp) {
    const auto r = render("Down-Pause-Up", 1, Speed::Medium, 22);
    const auto g = classify_window(window(2.5, 8.0), r.clean, default_templates(), r.config, &r.raw);
    EXPECT_EQ(g.family_name, "Down-Pause-Up");
    EXPECT_EQ(g.primitive_string, "-0+");
}

TEST(Gesture, FlippedCalibrationReadsInvertedAp) {
    ScenarioScript s;
    s.duration_s = 12.0;
    s.seed = 23;
    s.aps = {{"AP1", -40.0, 0.0, 1.0, true}};
    s.events.emplace_back(ScriptedGesture{3.0, "Up-Down", 2, Speed::High, Magnitude::High});
    const auto raw = generate_scenario(s).bundle[0];
    const auto clean = denoise(raw);
    auto w = window(2.5, 6.0);
    w.calibration.polarity_flipped = true;
    const auto g = classify_window(w, clean, default_templates(), {}, &raw);
    EXPECT_EQ(g.family_name, "Up-Down");
    EXPECT_EQ(g.count, 2);
}

TEST(Gesture, EmptyWindowIsUnknownWithWindowTiming) {
    const auto r = render("Up", 1, Speed::High, 24);
    const auto g = classify_window(window(10.0, 12.0), r.clean, default_templates(), r.config, &r.raw);
    EXPECT_FALSE(g.known());
    EXPECT_DOUBLE_EQ(g.start_s, 10.0);
    EXPECT_DOUBLE_EQ(g.end_s, 12.0);
}
