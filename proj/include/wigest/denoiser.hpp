#pragma once

// Wavelet shrinkage: decompose, soft-threshold every detail level, rebuild from
// the untouched approximation plus the shrunk details.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "wigest/error.hpp"
#include "wigest/trace.hpp"
#include "wigest/wavelet.hpp"

namespace wigest {

enum class SigmaEstimator { MadFinestLevel, Fixed };
enum class ThresholdRule { SureSoft, UniversalSoft };

struct DenoiseConfig {
    int levels = 7;
    SigmaEstimator sigma_estimator = SigmaEstimator::MadFinestLevel;
    double fixed_sigma = 0.0;  // used with SigmaEstimator::Fixed
    ThresholdRule threshold_rule = ThresholdRule::SureSoft;
    // SURE is unreliable on short coefficient vectors; those levels fall back to
    // the universal threshold.
    std::size_t sure_min_length = 32;
};

inline constexpr double kMadToSigma = 0.6745;

inline double median_inplace(std::vector<double>& v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 != 0) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// median(|d|) / 0.6745 over the finest detail coefficients.
inline double estimate_noise_sigma(std::span<const double> details_finest) {
    if (details_finest.size() < 8) fail(ErrorKind::Domain, "noise estimate needs at least 8 coefficients");
    std::vector<double> mags(details_finest.size());
    std::transform(details_finest.begin(), details_finest.end(), mags.begin(), [](double d) { return std::abs(d); });
    return median_inplace(mags) / kMadToSigma;
}

inline double soft_threshold(double d, double t) noexcept {
    const double mag = std::abs(d) - t;
    if (mag <= 0.0) return 0.0;
    return d < 0.0 ? -mag : mag;
}

// SURE(t) = n s^2 - 2 s^2 #{|d_i| <= t} + sum_i min(d_i^2, t^2), summed in input order.
inline double sure_risk(std::span<const double> detail, double sigma, double t) {
    const double s2 = sigma * sigma;
    std::size_t below = 0;
    double clipped = 0.0;
    for (double d : detail) {
        if (std::abs(d) <= t) ++below;
        clipped += std::min(d * d, t * t);
    }
    return static_cast<double>(detail.size()) * s2 - 2.0 * s2 * static_cast<double>(below) + clipped;
}

// Threshold minimising SURE over {0} u {|d_i|}; O(n log n).
inline double sure_threshold(std::span<const double> detail, double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma)) fail(ErrorKind::Domain, "sigma must be finite and >= 0");
    if (detail.empty() || sigma == 0.0) return 0.0;

    const std::size_t n = detail.size();
    std::vector<double> sq(n);
    std::transform(detail.begin(), detail.end(), sq.begin(), [](double d) { return d * d; });
    std::sort(sq.begin(), sq.end());

    const double s2 = sigma * sigma;
    // Candidate t = sqrt(sq[k]) with all equal magnitudes counted as "below".
    // risk(t) = n s2 - 2 s2 (k+1) + prefix(k) + (n-k-1) t^2
    std::vector<double> risk;
    std::vector<double> cand;
    risk.reserve(n + 1);
    cand.reserve(n + 1);

    std::size_t zeros = 0;
    while (zeros < n && sq[zeros] == 0.0) ++zeros;
    if (zeros == 0) {
        cand.push_back(0.0);
        risk.push_back(static_cast<double>(n) * s2);
    }
    double prefix = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        prefix += sq[k];
        if (k + 1 < n && sq[k + 1] == sq[k]) continue;
        const double below = static_cast<double>(k + 1);
        cand.push_back(std::sqrt(sq[k]));
        risk.push_back(static_cast<double>(n) * s2 - 2.0 * s2 * below + prefix +
                       static_cast<double>(n - k - 1) * sq[k]);
    }

    // Prefix sums round differently from a direct sum; settle near-ties with the
    // direct evaluation so the choice is the exact minimiser.
    const double best = *std::min_element(risk.begin(), risk.end());
    const double slack = 1e-9 * (std::abs(best) + static_cast<double>(n) * s2 + prefix);
    double chosen = 0.0;
    double chosen_risk = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (risk[i] > best + slack) continue;
        const double exact = sure_risk(detail, sigma, cand[i]);
        if (exact < chosen_risk) {
            chosen_risk = exact;
            chosen = cand[i];
        }
    }
    return chosen;
}

inline double universal_threshold(std::size_t n, double sigma) {
    if (n < 2) return 0.0;
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

struct DenoiseResult {
    std::vector<double> samples;
    double sigma = 0.0;
    std::vector<double> thresholds;  // per detail level, fine to coarse
};

inline DenoiseResult denoise_samples(std::span<const double> samples, const DenoiseConfig& config) {
    if (config.levels < 1) fail(ErrorKind::Domain, "denoise levels must be >= 1");
    if (config.levels >= 63 || (std::size_t{1} << config.levels) > samples.size())
        fail(ErrorKind::Domain, "trace of " + std::to_string(samples.size()) + " samples is too short for " +
                                    std::to_string(config.levels) + " levels");

    auto dec = dwt_decompose(samples, config.levels);
    DenoiseResult out;
    if (config.sigma_estimator == SigmaEstimator::Fixed) {
        out.sigma = config.fixed_sigma;
    } else {
        const auto& finest = dec.detail(1);
        out.sigma = finest.size() >= 8 ? estimate_noise_sigma(finest) : 0.0;
    }

    for (int l = 1; l <= dec.levels; ++l) {
        auto& d = dec.detail(l);
        double t = 0.0;
        if (config.threshold_rule == ThresholdRule::UniversalSoft || d.size() < config.sure_min_length)
            t = universal_threshold(d.size(), out.sigma);
        else
            t = sure_threshold(d, out.sigma);
        for (double& c : d) c = soft_threshold(c, t);
        out.thresholds.push_back(t);
    }
    out.samples = dwt_reconstruct(dec);
    return out;
}

inline RssiTrace denoise(const RssiTrace& trace, const DenoiseConfig& config = {}) {
    validate_trace(trace);
    RssiTrace out = trace;
    out.samples = denoise_samples(trace.samples, config).samples;
    return out;
}

}  // namespace wigest
