#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wigest/denoiser.hpp"
#include "wigest/simulator.hpp"

using namespace wigest;

namespace {

double exhaustive_sure_min(const std::vector<double>& d, double sigma) {
    double best = sure_risk(d, sigma, 0.0);
    for (double v : d) best = std::min(best, sure_risk(d, sigma, std::abs(v)));
    return best;
}

double variance(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

Scenario gesture_scenario(double sigma, std::uint64_t seed) {
    ScenarioScript s;
    s.duration_s = 12.0;
    s.seed = seed;
    s.aps = {{"AP1", -40.0, sigma, 1.0, false}};
    s.events.emplace_back(ScriptedGesture{3.0, "Up-Down", 2, Speed::Medium, Magnitude::High});
    return generate_scenario(s);
}

}  // namespace

TEST(Denoiser, ZeroDetailsGiveZeroSigma) { EXPECT_EQ(estimate_noise_sigma(std::vector<double>(16, 0.0)), 0.0); }

TEST(Denoiser, MadEstimateOfGaussian) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> n(0.0, 2.5);
    std::vector<double> d(10000);
    for (auto& v : d) v = n(rng);
    EXPECT_NEAR(estimate_noise_sigma(d), 2.5, 0.05 * 2.5);
}

TEST(Denoiser, MadIsRobustToOutliers) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> d(10000);
    for (auto& v : d) v = n(rng);
    for (std::size_t i = 0; i < d.size(); i += 100) d[i] = 1000.0;
    EXPECT_NEAR(estimate_noise_sigma(d), 1.0, 0.1);
}

TEST(Denoiser, ShortInputIsADomainError) { EXPECT_THROW(estimate_noise_sigma(std::vector<double>(7, 1.0)), Error); }

TEST(Denoiser, SoftThresholdPointwise) {
    for (double d : {-5.0, -1.0, -0.5, 0.0, 0.3, 1.0, 4.0})
        for (double t : {0.0, 0.5, 1.0, 2.0}) {
            const double want = (d < 0 ? -1.0 : 1.0) * std::max(std::abs(d) - t, 0.0);
            EXPECT_DOUBLE_EQ(soft_threshold(d, t), want);
        }
}

TEST(Denoiser, SureWithZeroSigmaIsZero) { EXPECT_EQ(sure_threshold(std::vector<double>{1, 2, 3}, 0.0), 0.0); }

TEST(Denoiser, SureOnEmptyIsZero) { EXPECT_EQ(sure_threshold(std::vector<double>{}, 1.0), 0.0); }

TEST(Denoiser, SureKillsPureNoise) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> d(4096);
    for (auto& v : d) v = n(rng);
    const double t = sure_threshold(d, 1.0);
    long zero = 0;
    for (double v : d) zero += soft_threshold(v, t) == 0.0;
    EXPECT_GE(zero, static_cast<long>(0.9 * 4096));
}

// Background well under sigma: with unit-variance background SURE settles near
// 1.8 sigma and the spikes keep only ~18 sigma.
TEST(Denoiser, SureKeepsLargeCoefficients) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n(0.0, 0.25);
    std::vector<double> d(512);
    for (auto& v : d) v = n(rng);
    for (std::size_t i : {5u, 100u, 300u}) d[i] = 20.0;
    const double t = sure_threshold(d, 1.0);
    EXPECT_LT(t, 20.0);
    for (std::size_t i : {5u, 100u, 300u}) EXPECT_GE(std::abs(soft_threshold(d[i], t)), 19.0);
    EXPECT_EQ(sure_risk(d, 1.0, t), exhaustive_sure_min(d, 1.0));
}

TEST(Denoiser, SureMatchesExhaustiveOnUnitNoise) {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> d(512);
    for (auto& v : d) v = n(rng);
    for (std::size_t i : {5u, 100u, 300u}) d[i] = 20.0;
    const double t = sure_threshold(d, 1.0);
    EXPECT_LT(t, 20.0);
    EXPECT_EQ(sure_risk(d, 1.0, t), exhaustive_sure_min(d, 1.0));
}

TEST(Denoiser, SureMatchesExhaustiveWithTies) {
    std::vector<double> d{1, -1, 1, 2, -2, 0, 0, 3, 0.5, -0.5};
    const double t = sure_threshold(d, 0.8);
    EXPECT_EQ(sure_risk(d, 0.8, t), exhaustive_sure_min(d, 0.8));
}

TEST(Denoiser, NoiselessGestureIsNearlyUntouched) {
    const auto scn = gesture_scenario(0.0, 1);
    const auto out = denoise(scn.bundle[0]);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(out.samples[i] - scn.bundle[0].samples[i]));
    EXPECT_LE(worst, 0.2);
}

TEST(Denoiser, NoisyGestureGainsThreeDb) {
    const auto clean = gesture_scenario(0.0, 2).bundle[0];
    const auto noisy = gesture_scenario(std::sqrt(2.0), 2).bundle[0];
    const auto out = denoise(noisy);
    const double gain_db = 20.0 * std::log10(rmse(noisy.samples, clean.samples) / rmse(out.samples, clean.samples));
    EXPECT_GE(gain_db, 3.0);
}

TEST(Denoiser, ConstantPlusNoiseLosesVariance) {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> n(-45.0, 1.0);
    RssiTrace t{"A", 50.0, 0.0, std::vector<double>(1024)};
    for (auto& v : t.samples) v = n(rng);
    EXPECT_LT(variance(denoise(t).samples), variance(t.samples));
}

TEST(Denoiser, PureNoiseVarianceDropsInMostTrials) {
    int ok = 0;
    for (int s = 0; s < 100; ++s) {
        std::mt19937_64 rng(100 + s);
        std::normal_distribution<double> n(-60.0, 2.0);
        RssiTrace t{"A", 50.0, 0.0, std::vector<double>(512)};
        for (auto& v : t.samples) v = n(rng);
        ok += variance(denoise(t).samples) <= variance(t.samples);
    }
    EXPECT_GE(ok, 95);
}

TEST(Denoiser, MetadataIsPreserved) {
    RssiTrace t{"APx", 20.0, 3.5, std::vector<double>(300, -50.0)};
    const auto out = denoise(t, DenoiseConfig{.levels = 4});
    EXPECT_EQ(out.ap_id, "APx");
    EXPECT_EQ(out.sample_rate_hz, 20.0);
    EXPECT_EQ(out.start_time_s, 3.5);
    EXPECT_EQ(out.size(), 300u);
}

TEST(Denoiser, TooShortIsADomainError) {
    RssiTrace t{"A", 50.0, 0.0, std::vector<double>(100, -50.0)};
    EXPECT_THROW(denoise(t, DenoiseConfig{.levels = 7}), Error);
}

TEST(Denoiser, UniversalRuleAndFixedSigma) {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> n(-50.0, 1.0);
    std::vector<double> x(256);
    for (auto& v : x) v = n(rng);
    DenoiseConfig c;
    c.levels = 4;
    c.threshold_rule = ThresholdRule::UniversalSoft;
    c.sigma_estimator = SigmaEstimator::Fixed;
    c.fixed_sigma = 1.0;
    const auto r = denoise_samples(x, c);
    EXPECT_EQ(r.sigma, 1.0);
    EXPECT_NEAR(r.thresholds[0], std::sqrt(2.0 * std::log(128.0)), 1e-12);
}
