#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "soundbench/core.hpp"
#include "soundbench/postproc.hpp"

namespace sb {

enum class CovKind { Diagonal, Full };

inline double logsumexp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

namespace detail {

// Cholesky factorization of a symmetric positive definite matrix;
// returns false if it is not positive definite.
inline bool cholesky(const Matrix& a, Matrix& l) {
    std::size_t n = a.rows;
    l = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (s <= 0.0) return false;
                l.at(i, i) = std::sqrt(s);
            } else {
                l.at(i, j) = s / l.at(j, j);
            }
        }
    }
    return true;
}

}  // namespace detail

// One Gaussian component. For diagonal covariance `cov` holds the d
// variances; for full covariance it is the d x d matrix (the Cholesky
// factor is cached for evaluation).
struct GaussianComponent {
    std::vector<double> mean;
    CovKind cov_kind = CovKind::Diagonal;
    std::vector<double> diag_var;
    Matrix full_cov;
    Matrix chol;       // cached
    double log_norm = 0.0;  // -(d/2) log(2 pi) - 1/2 log|Sigma|

    void finalize() {
        std::size_t d = mean.size();
        double logdet = 0.0;
        if (cov_kind == CovKind::Diagonal) {
            for (double v : diag_var) logdet += std::log(v);
        } else {
            if (!detail::cholesky(full_cov, chol)) {
                // regularize until positive definite
                double eps = 1e-6;
                Matrix reg = full_cov;
                while (true) {
                    for (std::size_t i = 0; i < d; ++i) reg.at(i, i) = full_cov.at(i, i) + eps;
                    if (detail::cholesky(reg, chol)) {
                        full_cov = reg;
                        break;
                    }
                    eps *= 10.0;
                }
            }
            for (std::size_t i = 0; i < d; ++i) logdet += 2.0 * std::log(chol.at(i, i));
        }
        log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
    }

    double log_density(const double* x) const {
        std::size_t d = mean.size();
        double quad = 0.0;
        if (cov_kind == CovKind::Diagonal) {
            for (std::size_t i = 0; i < d; ++i) {
                double dev = x[i] - mean[i];
                quad += dev * dev / diag_var[i];
            }
        } else {
            // solve L z = (x - mean), quad = z'z
            std::vector<double> z(d);
            for (std::size_t i = 0; i < d; ++i) {
                double s = x[i] - mean[i];
                for (std::size_t k = 0; k < i; ++k) s -= chol.at(i, k) * z[k];
                z[i] = s / chol.at(i, i);
            }
            for (double v : z) quad += v * v;
        }
        return log_norm - 0.5 * quad;
    }
};

struct Gmm {
    std::vector<double> weights;
    std::vector<GaussianComponent> components;
    std::vector<double> loglik_history;  // training log-likelihood per EM iteration

    double frame_loglik(const double* x) const {
        std::vector<double> terms(components.size());
        for (std::size_t m = 0; m < components.size(); ++m)
            terms[m] = std::log(weights[m]) + components[m].log_density(x);
        return logsumexp(terms);
    }

    // Frames assumed independent: sequence log-likelihood is the sum.
    double sequence_loglik(const Matrix& seq) const {
        double s = 0.0;
        for (std::size_t t = 0; t < seq.rows; ++t) s += frame_loglik(seq.row(t));
        return s;
    }
};

constexpr double kCovFloor = 1e-6;

namespace detail {

inline GaussianComponent data_covariance_component(const Matrix& frames, CovKind kind) {
    std::size_t n = frames.rows, d = frames.cols;
    GaussianComponent g;
    g.cov_kind = kind;
    g.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) g.mean[c] += frames.at(i, c);
    for (double& v : g.mean) v /= static_cast<double>(n);
    if (kind == CovKind::Diagonal) {
        g.diag_var.assign(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c) {
                double dev = frames.at(i, c) - g.mean[c];
                g.diag_var[c] += dev * dev;
            }
        for (double& v : g.diag_var) v = std::max(v / static_cast<double>(n), kCovFloor);
    } else {
        g.full_cov = Matrix(d, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    g.full_cov.at(a, b) += (frames.at(i, a) - g.mean[a]) *
                                           (frames.at(i, b) - g.mean[b]);
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) g.full_cov.at(a, b) /= static_cast<double>(n);
            g.full_cov.at(a, a) = std::max(g.full_cov.at(a, a), kCovFloor);
        }
    }
    g.finalize();
    return g;
}

}  // namespace detail

// EM training of one mixture. Means initialized by k-means on the
// frames, covariances by the data covariance, weights uniform. Stops
// when the log-likelihood gain drops below 1e-6 or at max_iters.
inline Gmm gmm_train(const Matrix& frames, int num_components, CovKind cov_kind, int max_iters,
                     std::uint64_t seed) {
    std::size_t n = frames.rows, d = frames.cols;
    std::size_t m_count = static_cast<std::size_t>(num_components);
    if (n < m_count) throw ConfigError("gmm_train: fewer frames than components");

    Gmm gmm;
    Codebook cb = kmeans_train(frames, m_count, seed);
    GaussianComponent base = detail::data_covariance_component(frames, cov_kind);
    for (std::size_t m = 0; m < m_count; ++m) {
        GaussianComponent g = base;
        for (std::size_t c = 0; c < d; ++c) g.mean[c] = cb.centroids.at(m, c);
        g.finalize();
        gmm.components.push_back(std::move(g));
        gmm.weights.push_back(1.0 / static_cast<double>(m_count));
    }

    Matrix resp(n, m_count);
    std::vector<double> terms(m_count);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        // E step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t m = 0; m < m_count; ++m)
                terms[m] = std::log(gmm.weights[m]) + gmm.components[m].log_density(frames.row(i));
            double lse = logsumexp(terms);
            ll += lse;
            for (std::size_t m = 0; m < m_count; ++m) resp.at(i, m) = std::exp(terms[m] - lse);
        }
        gmm.loglik_history.push_back(ll);
        if (ll - prev_ll < 1e-6 && iter > 0) break;
        prev_ll = ll;

        // M step
        for (std::size_t m = 0; m < m_count; ++m) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp.at(i, m);
            if (nk < 1e-10) continue;  // dead component keeps its parameters
            gmm.weights[m] = nk / static_cast<double>(n);
            auto& g = gmm.components[m];
            for (std::size_t c = 0; c < d; ++c) g.mean[c] = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < d; ++c)
                    g.mean[c] += resp.at(i, m) * frames.at(i, c);
            for (std::size_t c = 0; c < d; ++c) g.mean[c] /= nk;
            if (cov_kind == CovKind::Diagonal) {
                g.diag_var.assign(d, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t c = 0; c < d; ++c) {
                        double dev = frames.at(i, c) - g.mean[c];
                        g.diag_var[c] += resp.at(i, m) * dev * dev;
                    }
                for (double& v : g.diag_var) v = std::max(v / nk, kCovFloor);
            } else {
                g.full_cov = Matrix(d, d);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t a = 0; a < d; ++a)
                        for (std::size_t b = 0; b < d; ++b)
                            g.full_cov.at(a, b) += resp.at(i, m) *
                                                   (frames.at(i, a) - g.mean[a]) *
                                                   (frames.at(i, b) - g.mean[b]);
                for (std::size_t a = 0; a < d; ++a) {
                    for (std::size_t b = 0; b < d; ++b) g.full_cov.at(a, b) /= nk;
                    g.full_cov.at(a, a) = std::max(g.full_cov.at(a, a), kCovFloor);
                }
            }
            g.finalize();
        }
        // renormalize weights (dead components keep their mass share)
        double wsum = 0.0;
        for (double w : gmm.weights) wsum += w;
        for (double& w : gmm.weights) w /= wsum;
    }
    return gmm;
}

// One GMM per class, trained on that class's pooled frames.
struct GmmSet {
    std::vector<Gmm> per_class;  // index label-1
    CovKind cov_kind = CovKind::Diagonal;
    int num_components = 1;
};

inline GmmSet gmm_train_set(const std::vector<Matrix>& frames_per_class, int num_components,
                            CovKind cov_kind, int max_iters, std::uint64_t seed) {
    GmmSet set;
    set.cov_kind = cov_kind;
    set.num_components = num_components;
    for (std::size_t c = 0; c < frames_per_class.size(); ++c) {
        if (frames_per_class[c].rows < static_cast<std::size_t>(num_components))
            throw ConfigError("gmm_train_set: class " + std::to_string(c + 1) +
                              " has too few frames");
        set.per_class.push_back(
            gmm_train(frames_per_class[c], num_components, cov_kind, max_iters, seed + c));
    }
    return set;
}

inline std::vector<double> gmm_loglik(const GmmSet& set, const Matrix& seq) {
    std::vector<double> out;
    out.reserve(set.per_class.size());
    for (const auto& g : set.per_class) out.push_back(g.sequence_loglik(seq));
    return out;
}

}  // namespace sb
