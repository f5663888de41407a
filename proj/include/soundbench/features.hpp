#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "soundbench/audio.hpp"
#include "soundbench/binio.hpp"
#include "soundbench/core.hpp"
#include "soundbench/dsp.hpp"
#include "soundbench/wavelet.hpp"

namespace sb {

// T x d per-frame feature matrix with named columns.
struct FeatureSequence {
    Matrix values;
    std::vector<std::string> feature_names;
    double clip_duration = 0.0;

    std::size_t frames() const { return values.rows; }
    std::size_t dim() const { return values.cols; }

    int column_of(const std::string& name) const {
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

struct FeatureConfig {
    int mel_bands = 40;
    double mel_fmin = 300.0;
    double mel_fmax = 10000.0;
    int n_mfcc = 13;
    bool add_deltas = false;
    double rolloff_fraction = 0.99;
    std::vector<std::string> ttff_subset = {"energy", "zcr", "decrease", "flatness", "slope"};
    double log_floor = 1e-10;

    double frame_ms = 30.0;
    double overlap = 0.5;
    std::size_t fft_size = 2048;
    int wavelet_levels = 8;
};

inline double mel_of_hz(double f) { return 1127.0 * std::log(1.0 + f / 700.0); }
inline double hz_of_mel(double m) { return 700.0 * (std::exp(m / 1127.0) - 1.0); }

// Energy (RMS) and zero crossing rate on rectangular-window frames, plus
// the clip duration scalar.
inline FeatureSequence time_features(const FrameSequence& fs, const AudioClip& clip) {
    FeatureSequence out;
    out.feature_names = {"energy", "zcr"};
    out.clip_duration = clip.duration_seconds();
    out.values = Matrix(fs.frames.rows, 2);
    for (std::size_t t = 0; t < fs.frames.rows; ++t) {
        const double* f = fs.frames.row(t);
        double sumsq = 0.0;
        int crossings = 0;
        for (std::size_t i = 0; i < fs.frames.cols; ++i) {
            sumsq += f[i] * f[i];
            if (i > 0 && f[i - 1] * f[i] < 0.0) ++crossings;
        }
        out.values.at(t, 0) = std::sqrt(sumsq / static_cast<double>(fs.frames.cols));
        out.values.at(t, 1) = static_cast<double>(crossings);
    }
    return out;
}

// Per-frame spectral shape statistics over the bin index axis.
// All-zero frames yield all-zero rows, never NaN.
inline FeatureSequence spectral_shape(const Spectrogram& spec, const FeatureConfig& cfg) {
    FeatureSequence out;
    out.feature_names = {"rolloff", "centroid", "spread", "skewness",
                         "kurtosis", "slope",    "decrease", "flatness"};
    std::size_t bins = spec.num_bins();
    out.values = Matrix(spec.mags.rows, 8);
    for (std::size_t t = 0; t < spec.mags.rows; ++t) {
        const double* s = spec.mags.row(t);
        double total = 0.0, energy_total = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            total += s[k];
            energy_total += s[k] * s[k];
        }
        if (total <= 0.0) continue;  // row stays zero

        // roll-off: smallest k with cumulative energy >= fraction of total
        double target = cfg.rolloff_fraction * energy_total;
        double cum = 0.0;
        std::size_t roll = bins - 1;
        for (std::size_t k = 0; k < bins; ++k) {
            cum += s[k] * s[k];
            if (cum >= target) {
                roll = k;
                break;
            }
        }

        double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0, mu4 = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            double kk = static_cast<double>(k);
            double w = s[k] / total;
            mu1 += kk * w;
            mu2 += kk * kk * w;
            mu3 += kk * kk * kk * w;
            mu4 += kk * kk * kk * kk * w;
        }
        double var = mu2 - mu1 * mu1;
        double spread = var > 0.0 ? std::sqrt(var) : 0.0;
        double skew = 0.0, kurt = 0.0;
        if (spread > 1e-12) {
            double c3 = mu3 - 3.0 * mu1 * mu2 + 2.0 * mu1 * mu1 * mu1;
            double c4 = mu4 - 4.0 * mu1 * mu3 + 6.0 * mu1 * mu1 * mu2 - 3.0 * mu1 * mu1 * mu1 * mu1;
            skew = c3 / (spread * spread * spread);
            kurt = c4 / (var * var);
        }

        // ordinary least squares slope of S(t,k) against k
        double n = static_cast<double>(bins);
        double kbar = (n - 1.0) / 2.0;
        double sbar = total / n;
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            double dk = static_cast<double>(k) - kbar;
            num += dk * (s[k] - sbar);
            den += dk * dk;
        }
        double slope = num / den;

        double dec_sum = 0.0, dec_norm = 0.0;
        for (std::size_t k = 1; k < bins; ++k) {
            dec_sum += (s[k] - s[0]) / static_cast<double>(k);
            dec_norm += s[k];
        }
        double decrease = dec_norm > 0.0 ? dec_sum / dec_norm : 0.0;

        double log_sum = 0.0;
        for (std::size_t k = 0; k < bins; ++k) log_sum += std::log(std::max(s[k], cfg.log_floor));
        double flatness = std::exp(log_sum / n) / sbar;

        out.values.at(t, 0) = static_cast<double>(roll);
        out.values.at(t, 1) = mu1;
        out.values.at(t, 2) = spread;
        out.values.at(t, 3) = skew;
        out.values.at(t, 4) = kurt;
        out.values.at(t, 5) = slope;
        out.values.at(t, 6) = decrease;
        out.values.at(t, 7) = flatness;
    }
    return out;
}

// Spectral flux and correlation between consecutive frames. Row 0 is
// flux=0, correlation=1; a zero-norm frame in a pair gives flux=0,
// correlation=0.
inline FeatureSequence spectral_dynamics(const Spectrogram& spec) {
    FeatureSequence out;
    out.feature_names = {"flux", "correlation"};
    out.values = Matrix(spec.mags.rows, 2);
    if (spec.mags.rows == 0) return out;
    out.values.at(0, 0) = 0.0;
    out.values.at(0, 1) = 1.0;
    std::size_t bins = spec.num_bins();
    for (std::size_t t = 1; t < spec.mags.rows; ++t) {
        const double* a = spec.mags.row(t);
        const double* b = spec.mags.row(t - 1);
        double na = 0.0, nb = 0.0, dot = 0.0, diff = 0.0;
        for (std::size_t k = 0; k < bins; ++k) {
            na += a[k] * a[k];
            nb += b[k] * b[k];
            dot += a[k] * b[k];
            double d = a[k] - b[k];
            diff += d * d;
        }
        double denom = std::sqrt(na) * std::sqrt(nb);
        out.values.at(t, 0) = denom > 0.0 ? diff / denom : 0.0;
        out.values.at(t, 1) = denom > 0.0 ? dot / denom : 0.0;
    }
    return out;
}

namespace detail {

// Triangular mel filterbank; returns bands x bins weights.
inline Matrix mel_filterbank(const FeatureConfig& cfg, std::size_t bins, std::size_t fft_size,
                             int sample_rate) {
    double nyquist = sample_rate / 2.0;
    if (cfg.mel_fmax > nyquist) throw ConfigError("mel_fmax above Nyquist");
    if (cfg.mel_fmin <= 0.0 || cfg.mel_fmin >= cfg.mel_fmax)
        throw ConfigError("mel band edges invalid");

    int b = cfg.mel_bands;
    double mlo = mel_of_hz(cfg.mel_fmin);
    double mhi = mel_of_hz(cfg.mel_fmax);
    std::vector<double> edges(b + 2);
    for (int i = 0; i < b + 2; ++i)
        edges[i] = mlo + (mhi - mlo) * static_cast<double>(i) / static_cast<double>(b + 1);

    Matrix fb(b, bins);
    for (std::size_t k = 0; k < bins; ++k) {
        double mk = mel_of_hz(static_cast<double>(k) * sample_rate / static_cast<double>(fft_size));
        for (int i = 0; i < b; ++i) {
            double left = edges[i], center = edges[i + 1], right = edges[i + 2];
            double w = 0.0;
            if (mk > left && mk < right)
                w = mk <= center ? (mk - left) / (center - left) : (right - mk) / (right - center);
            fb.at(static_cast<std::size_t>(i), k) = w;
        }
    }
    return fb;
}

// Orthonormal DCT-II of a vector.
inline std::vector<double> dct2_ortho(const std::vector<double>& x) {
    std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i] * std::cos(std::numbers::pi * static_cast<double>(j) *
                                 (static_cast<double>(i) + 0.5) / static_cast<double>(n));
        double scale = j == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                              : std::sqrt(2.0 / static_cast<double>(n));
        out[j] = scale * s;
    }
    return out;
}

// Delta by the common 2-frame regression window, indices edge-clamped.
inline Matrix delta_of(const Matrix& m) {
    Matrix d(m.rows, m.cols);
    auto clamp = [&](long t) {
        if (t < 0) return std::size_t(0);
        if (t >= static_cast<long>(m.rows)) return m.rows - 1;
        return static_cast<std::size_t>(t);
    };
    constexpr double denom = 2.0 * (1.0 + 4.0);  // 2 * sum tau^2
    for (std::size_t t = 0; t < m.rows; ++t) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            double num = 0.0;
            for (long tau = 1; tau <= 2; ++tau)
                num += static_cast<double>(tau) *
                       (m.at(clamp(static_cast<long>(t) + tau), c) -
                        m.at(clamp(static_cast<long>(t) - tau), c));
            d.at(t, c) = num / denom;
        }
    }
    return d;
}

}  // namespace detail

// MFCC: DCT of log mel-filterbank energies of the power spectrum,
// coefficient c0 omitted. Optional delta and delta-delta columns.
inline FeatureSequence mfcc(const Spectrogram& spec, const FeatureConfig& cfg) {
    std::size_t bins = spec.num_bins();
    Matrix fb = detail::mel_filterbank(cfg, bins, spec.fft_size, spec.sample_rate);
    int b = cfg.mel_bands;
    if (cfg.n_mfcc < 1 || cfg.n_mfcc >= b) throw ConfigError("n_mfcc out of range");

    Matrix base(spec.mags.rows, static_cast<std::size_t>(cfg.n_mfcc));
    std::vector<double> logE(static_cast<std::size_t>(b));
    for (std::size_t t = 0; t < spec.mags.rows; ++t) {
        const double* s = spec.mags.row(t);
        for (int i = 0; i < b; ++i) {
            double e = 0.0;
            const double* w = fb.row(static_cast<std::size_t>(i));
            for (std::size_t k = 0; k < bins; ++k) e += w[k] * s[k] * s[k];
            logE[static_cast<std::size_t>(i)] = std::log(std::max(e, cfg.log_floor));
        }
        auto c = detail::dct2_ortho(logE);
        for (int j = 0; j < cfg.n_mfcc; ++j)
            base.at(t, static_cast<std::size_t>(j)) = c[static_cast<std::size_t>(j) + 1];
    }

    FeatureSequence out;
    for (int j = 1; j <= cfg.n_mfcc; ++j) out.feature_names.push_back("mfcc" + std::to_string(j));
    if (!cfg.add_deltas) {
        out.values = std::move(base);
        return out;
    }
    Matrix d1 = detail::delta_of(base);
    Matrix d2 = detail::delta_of(d1);
    out.values = Matrix(base.rows, base.cols * 3);
    for (std::size_t t = 0; t < base.rows; ++t)
        for (std::size_t c = 0; c < base.cols; ++c) {
            out.values.at(t, c) = base.at(t, c);
            out.values.at(t, base.cols + c) = d1.at(t, c);
            out.values.at(t, 2 * base.cols + c) = d2.at(t, c);
        }
    for (int j = 1; j <= cfg.n_mfcc; ++j) out.feature_names.push_back("dmfcc" + std::to_string(j));
    for (int j = 1; j <= cfg.n_mfcc; ++j) out.feature_names.push_back("ddmfcc" + std::to_string(j));
    return out;
}

// Mean and population std of a_M and each d_i; dimension 2(M+1).
inline std::vector<double> wavelet_features(const WaveletDecomposition& wd) {
    auto mean_std = [](const std::vector<double>& v, double& m, double& s) {
        m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        s = std::sqrt(var / static_cast<double>(v.size()));
    };
    std::vector<double> out;
    out.reserve(2 * (static_cast<std::size_t>(wd.levels) + 1));
    double m, s;
    mean_std(wd.approx, m, s);
    out.push_back(m);
    out.push_back(s);
    for (const auto& d : wd.details) {
        mean_std(d, m, s);
        out.push_back(m);
        out.push_back(s);
    }
    return out;
}

// Column-wise concatenation of frame-aligned feature sequences, picking
// the named columns in order.
inline FeatureSequence assemble_ttff(const std::vector<const FeatureSequence*>& sources,
                                     const std::vector<std::string>& subset) {
    if (sources.empty()) throw ConfigError("assemble_ttff: no sources");
    std::size_t t_count = sources[0]->frames();
    for (const auto* s : sources)
        if (s->frames() != t_count) throw ConfigError("assemble_ttff: frame count mismatch");

    FeatureSequence out;
    out.clip_duration = sources[0]->clip_duration;
    out.values = Matrix(t_count, subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const FeatureSequence* src = nullptr;
        int col = -1;
        for (const auto* s : sources) {
            col = s->column_of(subset[j]);
            if (col >= 0) {
                src = s;
                break;
            }
        }
        if (!src) throw ConfigError("assemble_ttff: unknown feature name: " + subset[j]);
        for (std::size_t t = 0; t < t_count; ++t)
            out.values.at(t, j) = src->values.at(t, static_cast<std::size_t>(col));
        out.feature_names.push_back(subset[j]);
    }
    return out;
}

// Binary feature container: magic "NARD", version u16, T u32, d u32,
// then T*d row-major 64-bit LE floats.
inline void write_feature_matrix(const std::string& path, const FeatureSequence& seq) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write feature file: " + path);
    out.write("NARD", 4);
    io::write_u16(out, 1);
    io::write_u32(out, static_cast<std::uint32_t>(seq.values.rows));
    io::write_u32(out, static_cast<std::uint32_t>(seq.values.cols));
    for (double v : seq.values.data) io::write_f64(out, v);
}

inline FeatureSequence read_feature_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open feature file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NARD", 4) != 0)
        throw FormatError(path + ": bad feature file magic");
    std::uint16_t version = io::read_u16(in);
    if (version != 1) throw FormatError(path + ": unsupported feature file version");
    std::uint32_t t_count = io::read_u32(in);
    std::uint32_t d = io::read_u32(in);
    FeatureSequence seq;
    seq.values = Matrix(t_count, d);
    for (double& v : seq.values.data) v = io::read_f64(in);
    if (!in) throw FormatError(path + ": truncated feature file");
    return seq;
}

}  // namespace sb
