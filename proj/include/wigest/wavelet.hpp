#pragma once

// Multi-level orthonormal Haar DWT.
//
// Each stage splits the current approximation c into
//   a[k] = (c[2k] + c[2k+1]) / sqrt(2)      (scaling / low-pass g)
//   d[k] = (c[2k] - c[2k+1]) / sqrt(2)      (wavelet / high-pass h)
// Odd-length stages are padded by repeating the last sample; the padding is
// implied by original_length and dropped again on reconstruction.
//
// With this sign convention a rising edge gives a negative detail response and
// a falling edge a positive one.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wigest/error.hpp"

namespace wigest {

enum class WaveletBasis { Haar };

struct WaveletDecomposition {
    int levels = 0;
    std::vector<double> approximation;          // alpha at the coarsest level
    std::vector<std::vector<double>> details;   // beta(1) .. beta(J), fine to coarse
    std::size_t original_length = 0;
    WaveletBasis basis = WaveletBasis::Haar;

    const std::vector<double>& detail(int level) const { return details.at(static_cast<std::size_t>(level - 1)); }
    std::vector<double>& detail(int level) { return details.at(static_cast<std::size_t>(level - 1)); }
};

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// ceil(n / 2^level)
constexpr std::size_t dyadic_length(std::size_t n, int level) noexcept {
    for (int l = 0; l < level; ++l) n = (n + 1) / 2;
    return n;
}

// Largest J with 2^J <= n (0 when n < 2).
constexpr int max_dwt_levels(std::size_t n) noexcept {
    int j = 0;
    while ((std::size_t{1} << (j + 1)) <= n) ++j;
    return j;
}

// Decomposes into `out`, reusing its buffers' capacity across calls.
inline void dwt_decompose_into(std::span<const double> signal, int levels, WaveletDecomposition& out) {
    if (levels < 1) fail(ErrorKind::Domain, "dwt levels must be >= 1");
    if (levels >= 63 || (std::size_t{1} << levels) > signal.size())
        fail(ErrorKind::Domain, "2^levels exceeds signal length " + std::to_string(signal.size()));
    for (double v : signal)
        if (!std::isfinite(v)) fail(ErrorKind::Domain, "dwt input contains a non-finite value");

    out.levels = levels;
    out.original_length = signal.size();
    out.basis = WaveletBasis::Haar;
    out.details.resize(static_cast<std::size_t>(levels));

    // One buffer holds the running approximation; a[k] only reads c[2k], c[2k+1]
    // so each level can overwrite its input front to back.
    auto& approx = out.approximation;
    approx.resize(dyadic_length(signal.size(), 1));
    const double* src = signal.data();
    std::size_t n = signal.size();
    for (int l = 1; l <= levels; ++l) {
        const std::size_t half = dyadic_length(n, 1);
        auto& d = out.detail(l);
        d.resize(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double even = src[2 * k];
            const double odd = 2 * k + 1 < n ? src[2 * k + 1] : even;
            approx[k] = (even + odd) * kInvSqrt2;
            d[k] = (even - odd) * kInvSqrt2;
        }
        src = approx.data();
        n = half;
    }
    approx.resize(n);
}

inline WaveletDecomposition dwt_decompose(std::span<const double> signal, int levels) {
    WaveletDecomposition out;
    dwt_decompose_into(signal, levels, out);
    return out;
}

inline void check_consistent(const WaveletDecomposition& dec) {
    if (dec.levels < 1 || dec.details.size() != static_cast<std::size_t>(dec.levels))
        fail(ErrorKind::Domain, "decomposition level count mismatch");
    if (dec.levels >= 63 || (std::size_t{1} << dec.levels) > dec.original_length)
        fail(ErrorKind::Domain, "decomposition too deep for its original length");
    if (dec.approximation.size() != dyadic_length(dec.original_length, dec.levels))
        fail(ErrorKind::Domain, "approximation length inconsistent with original length");
    for (int l = 1; l <= dec.levels; ++l)
        if (dec.detail(l).size() != dyadic_length(dec.original_length, l))
            fail(ErrorKind::Domain, "detail level " + std::to_string(l) + " has inconsistent length");
}

inline std::vector<double> dwt_reconstruct(const WaveletDecomposition& dec) {
    check_consistent(dec);
    std::vector<double> current = dec.approximation;
    std::vector<double> next;
    for (int l = dec.levels; l >= 1; --l) {
        const auto& d = dec.detail(l);
        next.resize(2 * current.size());
        for (std::size_t k = 0; k < current.size(); ++k) {
            next[2 * k] = (current[k] + d[k]) * kInvSqrt2;
            next[2 * k + 1] = (current[k] - d[k]) * kInvSqrt2;
        }
        next.resize(dyadic_length(dec.original_length, l - 1));
        current.swap(next);
    }
    return current;
}

// Level-`level` Haar detail evaluated at every sample offset instead of every
// 2^level samples: r[n] = 2^(-level/2) * (sum x[n, n+H) - sum x[n+H, n+2H)),
// H = 2^(level-1). r[2^level * k] equals the decimated beta(level)[k] wherever
// no padding is involved. Length is n - 2^level + 1. O(n) via prefix sums.
inline std::vector<double> stationary_detail(std::span<const double> signal, int level) {
    if (level < 1 || level >= 63) fail(ErrorKind::Domain, "level must be >= 1");
    const std::size_t width = std::size_t{1} << level;
    if (width > signal.size()) return {};
    const std::size_t half = width / 2;

    // Offset by the first sample to keep prefix sums small.
    const double ref = signal.front();
    std::vector<double> prefix(signal.size() + 1, 0.0);
    for (std::size_t i = 0; i < signal.size(); ++i) prefix[i + 1] = prefix[i] + (signal[i] - ref);

    const double scale = std::pow(2.0, -0.5 * level);
    std::vector<double> r(signal.size() - width + 1);
    for (std::size_t n = 0; n < r.size(); ++n) {
        const double first = prefix[n + half] - prefix[n];
        const double second = prefix[n + width] - prefix[n + half];
        r[n] = scale * (first - second);
    }
    return r;
}

}  // namespace wigest
