#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "soundbench/core.hpp"
#include "soundbench/features.hpp"

namespace sb {

struct Codebook {
    Matrix centroids;  // K x d
    std::size_t k = 0;
    double training_inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration
};

enum class PoolKind { Mean, MeanStd, Bow, InterpFlat };

struct PooledVector {
    std::vector<double> values;
    PoolKind kind = PoolKind::Mean;
};

// Column means; optionally concatenated with column population stds.
inline PooledVector pool_mean(const FeatureSequence& seq, bool with_std) {
    if (seq.frames() == 0) throw ConfigError("pool_mean: empty sequence");
    std::size_t d = seq.dim();
    double t_count = static_cast<double>(seq.frames());
    PooledVector out;
    out.kind = with_std ? PoolKind::MeanStd : PoolKind::Mean;
    out.values.assign(with_std ? 2 * d : d, 0.0);
    for (std::size_t t = 0; t < seq.frames(); ++t)
        for (std::size_t c = 0; c < d; ++c) out.values[c] += seq.values.at(t, c);
    for (std::size_t c = 0; c < d; ++c) out.values[c] /= t_count;
    if (with_std) {
        for (std::size_t t = 0; t < seq.frames(); ++t)
            for (std::size_t c = 0; c < d; ++c) {
                double dev = seq.values.at(t, c) - out.values[c];
                out.values[d + c] += dev * dev;
            }
        for (std::size_t c = 0; c < d; ++c) out.values[d + c] = std::sqrt(out.values[d + c] / t_count);
    }
    return out;
}

inline std::size_t nearest_centroid(const Matrix& centroids, const double* x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.rows; ++j) {
        double dist = squared_distance(centroids.row(j), x, centroids.cols);
        if (dist < best_d) {  // ties resolve to the lowest index
            best_d = dist;
            best = j;
        }
    }
    return best;
}

// Lloyd's algorithm. Init samples K distinct frame indices (seeded); an
// empty cluster is reseeded to the point farthest from its assigned
// centroid. Stops on assignment fixpoint or max_iters.
inline Codebook kmeans_train(const Matrix& frames, std::size_t k, std::uint64_t seed,
                             int max_iters = 100) {
    if (frames.rows < k) throw ConfigError("kmeans_train: fewer frames than clusters");
    if (k < 1) throw ConfigError("kmeans_train: k must be >= 1");
    std::size_t n = frames.rows, d = frames.cols;

    Rng rng(seed);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);

    Codebook cb;
    cb.k = k;
    cb.centroids = Matrix(k, d);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < d; ++c) cb.centroids.at(j, c) = frames.at(idx[j], c);

    std::vector<std::size_t> assign(n, k), prev(n, k + 1);
    std::vector<double> dist_to_centroid(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = nearest_centroid(cb.centroids, frames.row(i));
            dist_to_centroid[i] = squared_distance(cb.centroids.row(assign[i]), frames.row(i), d);
            inertia += dist_to_centroid[i];
        }
        cb.inertia_history.push_back(inertia);
        cb.training_inertia = inertia;
        if (assign == prev) break;
        prev = assign;

        std::vector<std::size_t> counts(k, 0);
        Matrix sums(k, d);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t c = 0; c < d; ++c) sums.at(assign[i], c) += frames.at(i, c);
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                // reseed to the globally farthest point
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i)
                    if (dist_to_centroid[i] > far_d) {
                        far_d = dist_to_centroid[i];
                        far = i;
                    }
                for (std::size_t c = 0; c < d; ++c) cb.centroids.at(j, c) = frames.at(far, c);
                dist_to_centroid[far] = 0.0;
            } else {
                for (std::size_t c = 0; c < d; ++c)
                    cb.centroids.at(j, c) = sums.at(j, c) / static_cast<double>(counts[j]);
            }
        }
    }
    return cb;
}

// Normalized histogram of nearest-centroid assignments.
inline PooledVector bow_encode(const FeatureSequence& seq, const Codebook& cb) {
    if (seq.dim() != cb.centroids.cols) throw ConfigError("bow_encode: dimension mismatch");
    PooledVector out;
    out.kind = PoolKind::Bow;
    out.values.assign(cb.k, 0.0);
    for (std::size_t t = 0; t < seq.frames(); ++t)
        out.values[nearest_centroid(cb.centroids, seq.values.row(t))] += 1.0;
    for (double& v : out.values) v /= static_cast<double>(seq.frames());
    return out;
}

// round(mean of T), half up, minimum 1. Computed on training folds only.
inline std::size_t mean_sequence_length(const std::vector<std::size_t>& lengths) {
    if (lengths.empty()) throw ConfigError("mean_sequence_length: no sequences");
    double sum = 0.0;
    for (std::size_t t : lengths) sum += static_cast<double>(t);
    double mean = sum / static_cast<double>(lengths.size());
    std::size_t r = static_cast<std::size_t>(std::floor(mean + 0.5));
    return r < 1 ? 1 : r;
}

// Per-dimension linear interpolation at target_len uniformly spaced
// points over [0, T-1], flattened time-major.
inline PooledVector interpolate(const FeatureSequence& seq, std::size_t target_len) {
    if (seq.frames() == 0) throw ConfigError("interpolate: empty sequence");
    if (target_len < 1) throw ConfigError("interpolate: target length must be >= 1");
    std::size_t t_in = seq.frames(), d = seq.dim();
    PooledVector out;
    out.kind = PoolKind::InterpFlat;
    out.values.assign(target_len * d, 0.0);
    for (std::size_t i = 0; i < target_len; ++i) {
        double pos = target_len == 1 ? 0.0
                                     : static_cast<double>(i) * static_cast<double>(t_in - 1) /
                                           static_cast<double>(target_len - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        if (lo >= t_in - 1) lo = t_in >= 2 ? t_in - 2 : 0;
        double frac = pos - static_cast<double>(lo);
        std::size_t hi = t_in == 1 ? lo : lo + 1;
        for (std::size_t c = 0; c < d; ++c)
            out.values[i * d + c] =
                (1.0 - frac) * seq.values.at(lo, c) + frac * seq.values.at(hi, c);
    }
    return out;
}

}  // namespace sb
