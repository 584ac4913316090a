#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "wigest/evaluation.hpp"

using namespace wigest;

namespace {

GroundTruth truth_with(std::vector<TruthSpan> spans) {
    GroundTruth t;
    t.spans = std::move(spans);
    return t;
}

TruthSpan gesture_span(std::string family, double start, double end, int count = 1) {
    TruthSpan s;
    s.type = SpanType::Gesture;
    s.label = std::move(family);
    s.start_s = start;
    s.end_s = end;
    s.count = count;
    return s;
}

GestureEvent predicted(std::string family, double start, double end, int count = 1, double hz = 0.0) {
    GestureEvent g;
    g.family_name = std::move(family);
    g.start_s = start;
    g.end_s = end;
    g.count = count;
    g.frequency_hz = hz;
    return g;
}

std::string report_text(const EvalReport& r) {
    std::ostringstream o;
    write_report_text(o, r);
    return o.str();
}

}  // namespace

TEST(Evaluation, ConfusionMatrixBookkeeping) {
    ConfusionMatrix m({"A", "B", std::string(kNoneLabel)});
    m.add("A", "A", 3);
    m.add("A", "B");
    m.add("B", "B", 2);
    m.add("none", "A", 5);  // spurious predictions do not count against accuracy
    EXPECT_EQ(m.row_total(0), 4);
    EXPECT_DOUBLE_EQ(m.rate(0, 0), 0.75);
    EXPECT_DOUBLE_EQ(m.accuracy(), 5.0 / 6.0);
    ConfusionMatrix n({"A", "B", std::string(kNoneLabel)});
    n.add("B", "A");
    m.merge(n);
    EXPECT_EQ(m.count(1, 0), 1);
    EXPECT_THROW(m.add("C", "A"), Error);
    EXPECT_THROW(m.add("A", "A", -1), Error);
    EXPECT_THROW(ConfusionMatrix({"A", "A"}), Error);
    EXPECT_THROW(m.merge(ConfusionMatrix({"A"})), Error);
}

TEST(Evaluation, EmpiricalCdf) {
    const auto cdf = empirical_cdf(std::vector<int>{2, 0, 0, 1});
    ASSERT_EQ(cdf.size(), 3u);
    EXPECT_EQ(cdf[0].first, 0);
    EXPECT_DOUBLE_EQ(cdf[0].second, 0.5);
    EXPECT_DOUBLE_EQ(cdf[1].second, 0.75);
    EXPECT_DOUBLE_EQ(cdf[2].second, 1.0);
    EXPECT_TRUE(empirical_cdf(std::vector<double>{}).empty());
}

TEST(Evaluation, FrequencyErrorIsPeriodDifference) {
    EXPECT_DOUBLE_EQ(frequency_error_s(1.0, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(frequency_error_s(2.0, 2.0), 0.0);
    EXPECT_TRUE(std::isinf(frequency_error_s(0.0, 1.0)));
    EXPECT_DOUBLE_EQ(true_frequency_hz(gesture_span("Up-Down", 1.0, 4.0, 3)), 1.0);
    EXPECT_DOUBLE_EQ(true_frequency_hz(gesture_span("Up-Down", 1.0, 4.0, 1)), 0.0);
}

TEST(Evaluation, ScoresPerfectAndFlawedPredictions) {
    const auto truth = truth_with({gesture_span("Up-Down", 2.0, 5.0, 3), gesture_span("Up", 10.0, 10.5)});
    PipelineResult r;
    r.gestures = {predicted("Up-Down", 2.1, 5.0, 3, 1.0), predicted("Up", 10.0, 10.6)};
    EvalReport good;
    score_scenario(good, truth, r, 60.0);
    EXPECT_DOUBLE_EQ(good.gestures.accuracy(), 1.0);
    EXPECT_DOUBLE_EQ(good.exact_count_rate(), 1.0);
    EXPECT_DOUBLE_EQ(good.frequency_within(1.0), 1.0);
    EXPECT_NEAR(good.hours, 60.0 / 3600.0, 1e-12);

    r.gestures = {predicted("Down-Up", 2.0, 5.0), predicted("Up", 20.0, 21.0)};
    EvalReport bad;
    score_scenario(bad, truth, r, 60.0);
    const auto& m = bad.gestures;
    EXPECT_EQ(m.count(m.index("Up-Down"), m.index("Down-Up")), 1);
    EXPECT_EQ(m.count(m.index("Up"), m.index(kNoneLabel)), 1);
    EXPECT_EQ(m.count(m.index(kNoneLabel), m.index("Up")), 1);
    EXPECT_DOUBLE_EQ(m.accuracy(), 0.0);
}

TEST(Evaluation, ScoringIgnoresOrder) {
    std::vector<TruthSpan> spans;
    std::vector<GestureEvent> preds;
    for (int i = 0; i < 8; ++i) {
        const double t = 5.0 * i;
        spans.push_back(gesture_span(i % 2 ? "Up" : "Up-Down", t, t + 2.0, i % 2 ? 1 : 2));
        preds.push_back(predicted(i % 3 ? "Up" : "Up-Down", t + 0.1, t + 2.0, 2, 0.9));
    }
    PipelineResult r;
    r.gestures = preds;
    EvalReport a;
    score_scenario(a, truth_with(spans), r, 40.0);
    std::mt19937_64 rng(41);
    std::shuffle(spans.begin(), spans.end(), rng);
    std::shuffle(r.gestures.begin(), r.gestures.end(), rng);
    EvalReport b;
    score_scenario(b, truth_with(spans), r, 40.0);
    EXPECT_EQ(report_text(a), report_text(b));
}

TEST(Evaluation, FalsePreamblesAreThoseWithoutTruth) {
    TruthSpan pre;
    pre.type = SpanType::Preamble;
    pre.start_s = 3.0;
    pre.end_s = 7.0;
    PipelineResult r;
    PreambleDetection real, fake;
    real.start_s = 3.1;
    real.end_s = 6.9;
    fake.start_s = 30.0;
    fake.end_s = 34.0;
    r.preambles = {real, fake};
    EvalReport rep;
    score_scenario(rep, truth_with({pre}), r, 3600.0);
    EXPECT_EQ(rep.preamble_false_detections, 1);
    EXPECT_DOUBLE_EQ(rep.false_preambles_per_hour(), 1.0);
}

TEST(Evaluation, PlayScenarioYieldsOnePlayAction) {
    const auto scn = generate_scenario(load_script(WIGEST_SCENARIO_DIR "/play.script"));
    const auto r = run_pipeline(scn.bundle);
    ASSERT_EQ(r.actions.size(), 1u);
    EXPECT_EQ(r.actions[0].action_name, "play");
    EvalReport rep;
    score_scenario(rep, scn.truth, r, scn.bundle[0].duration_s());
    EXPECT_DOUBLE_EQ(rep.gestures.accuracy(), 1.0);
    EXPECT_EQ(rep.preamble_false_detections, 0);
}

TEST(Evaluation, NoiseOnlyTracesTriggerNoActions) {
    int quiet = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        ScenarioScript s;
        s.duration_s = 60.0;
        s.seed = 7000 + seed;
        for (int a = 0; a < 3; ++a) s.aps.push_back({"AP" + std::to_string(a + 1), -40.0 - 5.0 * a, 1.0, std::nullopt, false});
        if (run_pipeline(generate_scenario(s).bundle).actions.empty()) ++quiet;
    }
    EXPECT_GE(quiet, 38);
}

TEST(Evaluation, PrimitiveTrialsAreReproducible) {
    const auto a = primitive_trials(2.0, 1, 60, 9);
    const auto b = primitive_trials(2.0, 1, 60, 9);
    EXPECT_EQ(a.correct, b.correct);
    EXPECT_EQ(a.trials, 60);
    EXPECT_DOUBLE_EQ(primitive_trials(0.0, 1, 60, 9).accuracy(), 1.0);
    EXPECT_THROW(primitive_trials(1.0, 0, 10, 1), Error);
    EXPECT_THROW(primitive_trials(-1.0, 1, 10, 1), Error);
}

TEST(Evaluation, CalibrationBracketsTarget) {
    const auto c = calibrate_sigma(0.875, 100, 3, {}, 0.25, 16.0, 6);
    EXPECT_GT(c.sigma_db, 0.25);
    EXPECT_LT(c.sigma_db, 16.0);
    EXPECT_NEAR(c.accuracy, 0.875, 0.1);
    EXPECT_EQ(c.iterations, 6);
}

TEST(Evaluation, CountTrialsWithoutNoiseAreExact) {
    const auto r = count_trials(0.0, 1, 30, 5);
    EXPECT_DOUBLE_EQ(r.exact_count_rate(), 1.0);
    EXPECT_DOUBLE_EQ(r.frequency_within(1.0), 1.0);
}

TEST(Evaluation, InterferenceCorpusHasNoGestures) {
    const auto s = interference_script(600.0, 1.0, 3);
    EXPECT_NO_THROW(validate_script(s));
    EXPECT_GT(s.events.size(), 10u);
    const auto scn = generate_scenario(s);
    EXPECT_TRUE(scn.truth.of_type(SpanType::Gesture).empty());
    EXPECT_EQ(scn.truth.of_type(SpanType::Interference).size(), s.events.size());
    EXPECT_GE(preamble_false_detections(s, 1), preamble_false_detections(s, 4));
}

TEST(Evaluation, WritersEmitHeaders) {
    EvalReport r;
    r.count_errors = {0, 1};
    r.frequency_errors_s = {0.5, std::numeric_limits<double>::infinity()};
    std::ostringstream conf, cdf, freq, curve;
    write_confusion_csv(conf, r.gestures);
    write_cdf_csv(cdf, "count_error", r.count_errors);
    write_cdf_csv(freq, "period_error_s", r.frequency_errors_s);
    write_curve_csv(curve, "sigma_db", {{1.0, 0.9, 10}});
    EXPECT_EQ(conf.str().substr(0, 16), "truth\\predicted,");
    EXPECT_EQ(cdf.str(), "count_error,cdf\n0,0.5000\n1,1.0000\n");
    EXPECT_NE(freq.str().find("inf,1.0000"), std::string::npos);
    EXPECT_EQ(curve.str(), "sigma_db,accuracy,trials\n1.0000,0.9000,10\n");
}
