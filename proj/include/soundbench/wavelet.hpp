#pragma once

#include <array>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

// The 8-tap Daubechies scaling filter (db4 in vanishing-moment naming).
inline constexpr std::array<double, 8> kDb8TapLowpass = {
    0.23037781330885523,   0.7148465705525415,   0.6308807679295904,
    -0.02798376941698385,  -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945,  -0.010597401784997278};

inline std::array<double, 8> db8_highpass() {
    std::array<double, 8> g{};
    for (std::size_t k = 0; k < 8; ++k) {
        double v = kDb8TapLowpass[7 - k];
        g[k] = (k % 2 == 0) ? v : -v;
    }
    return g;
}

struct WaveletDecomposition {
    std::vector<double> approx;                // a_M
    std::vector<std::vector<double>> details;  // d_1 .. d_M
    int levels = 0;
    std::vector<std::size_t> input_lengths;    // per-level input length, for inversion
};

namespace detail {

// Half-sample symmetric extension by p samples each side.
inline std::vector<double> sym_extend(const std::vector<double>& x, std::size_t p) {
    std::vector<double> ext;
    ext.reserve(x.size() + 2 * p);
    for (std::size_t i = 0; i < p; ++i) ext.push_back(x[p - 1 - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < p; ++i) ext.push_back(x[x.size() - 1 - i]);
    return ext;
}

// One analysis stage: symmetric extension, decimated convolution over
// the interior of the extended signal (full-conv indices 7, 9, ...,
// ext_len-1). The interior restriction keeps detail coefficients of a
// constant signal exactly zero, and reconstruction stays exact.
inline void dwt_step(const std::vector<double>& x, std::vector<double>& approx,
                     std::vector<double>& det) {
    constexpr std::size_t taps = 8;
    auto g = db8_highpass();
    std::vector<double> ext = sym_extend(x, taps - 1);
    std::size_t m = (ext.size() - 1 - (taps - 1)) / 2 + 1;
    approx.assign(m, 0.0);
    det.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t pos = taps - 1 + 2 * i;  // index into the full convolution
        double a = 0.0, d = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            double v = ext[pos - j];
            a += kDb8TapLowpass[j] * v;
            d += g[j] * v;
        }
        approx[i] = a;
        det[i] = d;
    }
}

// Inverse of dwt_step: upsample by 2, convolve with the time-reversed
// filters, crop the extension.
inline std::vector<double> idwt_step(const std::vector<double>& approx,
                                     const std::vector<double>& det, std::size_t out_len) {
    constexpr std::size_t taps = 8;
    auto g = db8_highpass();
    std::size_t m = approx.size();
    std::size_t up_len = 2 * m;
    std::vector<double> rec(up_len + taps - 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < taps; ++j) {
            // reversed filters: h[taps-1-j], g[taps-1-j]
            rec[2 * i + j] += approx[i] * kDb8TapLowpass[taps - 1 - j] + det[i] * g[taps - 1 - j];
        }
    }
    std::vector<double> out(out_len, 0.0);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = rec[taps - 1 + i];
    return out;
}

}  // namespace detail

// M-stage cascade of db 8-tap analysis filtering and downsampling by 2,
// with symmetric boundary extension.
inline WaveletDecomposition dwt(const std::vector<double>& samples, int levels) {
    if (levels < 1) throw ConfigError("dwt: levels must be >= 1");
    if (samples.size() < (std::size_t(1) << levels))
        throw ConfigError("dwt: signal shorter than 2^levels");
    WaveletDecomposition wd;
    wd.levels = levels;
    std::vector<double> a = samples;
    for (int i = 0; i < levels; ++i) {
        wd.input_lengths.push_back(a.size());
        std::vector<double> next_a, d;
        detail::dwt_step(a, next_a, d);
        wd.details.push_back(std::move(d));
        a = std::move(next_a);
    }
    wd.approx = std::move(a);
    return wd;
}

}  // namespace sb
