#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

enum class WindowKind { Hamming, Rectangular };

// T x L frame matrix. Window already applied multiplicatively.
struct FrameSequence {
    Matrix frames;
    std::size_t hop = 0;
    WindowKind window_kind = WindowKind::Hamming;
    int sample_rate = 0;
};

struct Spectrogram {
    Matrix mags;  // T x (N/2+1), magnitude coefficients
    std::size_t fft_size = 0;
    int sample_rate = 0;

    std::size_t num_bins() const { return mags.cols; }
};

// Classic Hamming, w(n) = 0.54 - 0.46 cos(2 pi n / (L-1)).
inline std::vector<double> hamming_window(std::size_t length) {
    std::vector<double> w(length, 1.0);
    if (length < 2) return w;
    for (std::size_t n = 0; n < length; ++n)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                      static_cast<double>(length - 1));
    return w;
}

// Slices the signal into frames of frame_ms with the given overlap.
// The final partial frame is zero padded so very short clips still
// produce at least one frame.
inline FrameSequence frame_signal(const std::vector<double>& samples, int sample_rate,
                                  double frame_ms, double overlap, WindowKind window_kind) {
    if (samples.empty()) throw ConfigError("frame_signal: empty signal");
    if (frame_ms <= 0.0) throw ConfigError("frame_signal: frame_ms must be positive");
    if (overlap < 0.0 || overlap >= 1.0) throw ConfigError("frame_signal: overlap must be in [0,1)");

    std::size_t len = static_cast<std::size_t>(std::lround(frame_ms * sample_rate / 1000.0));
    std::size_t hop = static_cast<std::size_t>(std::lround(static_cast<double>(len) * (1.0 - overlap)));
    if (len == 0 || hop == 0) throw ConfigError("frame_signal: frame too short");

    std::size_t n = samples.size();
    std::size_t full = n >= len ? (n - len) / hop + 1 : 0;
    std::size_t t_count = full;
    if (full == 0) {
        t_count = 1;  // single zero-padded frame
    } else if ((full - 1) * hop + len < n) {
        t_count = full + 1;  // one zero-padded tail frame
    }

    std::vector<double> window = window_kind == WindowKind::Hamming
                                     ? hamming_window(len)
                                     : std::vector<double>(len, 1.0);

    FrameSequence fs;
    fs.hop = hop;
    fs.window_kind = window_kind;
    fs.sample_rate = sample_rate;
    fs.frames = Matrix(t_count, len);
    for (std::size_t t = 0; t < t_count; ++t) {
        std::size_t start = t * hop;
        for (std::size_t i = 0; i < len; ++i) {
            std::size_t s = start + i;
            if (s < n) fs.frames.at(t, i) = samples[s] * window[i];
        }
    }
    return fs;
}

namespace detail {

// Iterative radix-2 Cooley-Tukey, in place. n must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace detail

// Full complex spectrum of a real frame zero-padded to fft_size.
inline std::vector<std::complex<double>> fft_real(const double* frame, std::size_t len,
                                                  std::size_t fft_size) {
    std::vector<std::complex<double>> a(fft_size);
    for (std::size_t i = 0; i < len; ++i) a[i] = frame[i];
    detail::fft_inplace(a);
    return a;
}

// Magnitude STFT; bins 0..N/2 retained.
inline Spectrogram stft_magnitude(const FrameSequence& fs, std::size_t fft_size) {
    std::size_t len = fs.frames.cols;
    if (fft_size < len) throw ConfigError("stft_magnitude: fft_size smaller than frame length");
    if ((fft_size & (fft_size - 1)) != 0)
        throw ConfigError("stft_magnitude: fft_size must be a power of two");

    Spectrogram spec;
    spec.fft_size = fft_size;
    spec.sample_rate = fs.sample_rate;
    std::size_t bins = fft_size / 2 + 1;
    spec.mags = Matrix(fs.frames.rows, bins);
    for (std::size_t t = 0; t < fs.frames.rows; ++t) {
        auto x = fft_real(fs.frames.row(t), len, fft_size);
        for (std::size_t k = 0; k < bins; ++k) spec.mags.at(t, k) = std::abs(x[k]);
    }
    return spec;
}

}  // namespace sb
