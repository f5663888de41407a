#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

#include "soundbench/core.hpp"
#include "soundbench/gmm.hpp"

namespace sb {

namespace detail {

inline double log_add(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace detail

// Left-to-right HMM: states may only self-loop or advance, the chain
// starts in state 1. Emissions are per-state GMMs (single Gaussian by
// default). Likelihood sums over all end states.
struct Hmm {
    int num_states = 1;
    Matrix log_trans;            // S x S, -inf outside the self/advance band
    std::vector<Gmm> emissions;  // one per state
    std::vector<double> loglik_history;

    double forward_loglik(const Matrix& seq) const {
        std::size_t s_count = static_cast<std::size_t>(num_states);
        std::size_t t_count = seq.rows;
        std::vector<double> cur(s_count, -std::numeric_limits<double>::infinity());
        cur[0] = emissions[0].frame_loglik(seq.row(0));  // starts in state 1
        std::vector<double> next(s_count);
        for (std::size_t t = 1; t < t_count; ++t) {
            for (std::size_t s = 0; s < s_count; ++s) {
                // predecessors: s (self-loop) and s-1 (advance)
                double a = cur[s] + log_trans.at(s, s);
                if (s > 0) a = detail::log_add(a, cur[s - 1] + log_trans.at(s - 1, s));
                next[s] = a + emissions[s].frame_loglik(seq.row(t));
            }
            cur = next;
        }
        return logsumexp(cur);
    }
};

struct HmmSet {
    std::vector<Hmm> per_class;  // index label-1
    CovKind cov_kind = CovKind::Diagonal;
    int num_states = 1;
    int num_components = 1;
};

// Baum-Welch for one class. Initialization segments every training
// sequence uniformly into S chunks and fits each state's emission on
// its chunk frames. If S exceeds the shortest sequence the state count
// is clamped with a warning.
inline Hmm hmm_train(const std::vector<Matrix>& sequences, int num_states, int num_components,
                     CovKind cov_kind, int max_iters, std::uint64_t seed) {
    if (sequences.empty()) throw ConfigError("hmm_train: no sequences");
    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    for (const auto& s : sequences) {
        if (s.rows == 0) throw ConfigError("hmm_train: empty sequence");
        min_len = std::min(min_len, s.rows);
    }
    if (static_cast<std::size_t>(num_states) > min_len) {
        std::cerr << "hmm_train: clamping state count " << num_states << " -> " << min_len
                  << " (shortest sequence)\n";
        num_states = static_cast<int>(min_len);
    }
    std::size_t s_count = static_cast<std::size_t>(num_states);
    std::size_t d = sequences[0].cols;

    Hmm hmm;
    hmm.num_states = num_states;

    // uniform segmentation init
    std::vector<Matrix> state_frames(s_count);
    {
        std::vector<std::vector<const double*>> rows(s_count);
        for (const auto& seq : sequences) {
            for (std::size_t t = 0; t < seq.rows; ++t) {
                std::size_t s = t * s_count / seq.rows;
                rows[s].push_back(seq.row(t));
            }
        }
        for (std::size_t s = 0; s < s_count; ++s) {
            state_frames[s] = Matrix(rows[s].size(), d);
            for (std::size_t i = 0; i < rows[s].size(); ++i)
                for (std::size_t c = 0; c < d; ++c) state_frames[s].at(i, c) = rows[s][i][c];
        }
    }
    double total_frames = 0.0;
    for (const auto& seq : sequences) total_frames += static_cast<double>(seq.rows);
    double mean_chunk = total_frames / static_cast<double>(sequences.size() * s_count);
    double advance = 1.0 / std::max(mean_chunk, 1.0);
    advance = std::min(0.9, std::max(0.05, advance));

    hmm.log_trans = Matrix(s_count, s_count, -std::numeric_limits<double>::infinity());
    for (std::size_t s = 0; s < s_count; ++s) {
        if (s + 1 < s_count) {
            hmm.log_trans.at(s, s) = std::log(1.0 - advance);
            hmm.log_trans.at(s, s + 1) = std::log(advance);
        } else {
            hmm.log_trans.at(s, s) = 0.0;  // absorbing last state
        }
    }

    for (std::size_t s = 0; s < s_count; ++s) {
        if (num_components == 1) {
            Gmm g;
            g.weights = {1.0};
            g.components.push_back(detail::data_covariance_component(state_frames[s], cov_kind));
            hmm.emissions.push_back(std::move(g));
        } else {
            hmm.emissions.push_back(
                gmm_train(state_frames[s], num_components, cov_kind, 10, seed + s));
        }
    }

    std::size_t m_count = static_cast<std::size_t>(num_components);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        double total_ll = 0.0;
        // accumulators
        Matrix trans_num(s_count, s_count);  // expected transition counts
        std::vector<double> state_occ(s_count, 0.0);
        std::vector<std::vector<double>> comp_occ(s_count, std::vector<double>(m_count, 0.0));
        std::vector<std::vector<std::vector<double>>> mean_acc(
            s_count, std::vector<std::vector<double>>(m_count, std::vector<double>(d, 0.0)));
        std::vector<std::vector<std::vector<double>>> var_acc(
            s_count, std::vector<std::vector<double>>(m_count, std::vector<double>(d, 0.0)));
        std::vector<std::vector<Matrix>> full_acc(
            s_count, std::vector<Matrix>(m_count, Matrix(cov_kind == CovKind::Full ? d : 0,
                                                         cov_kind == CovKind::Full ? d : 0)));

        for (const auto& seq : sequences) {
            std::size_t t_count = seq.rows;
            Matrix logb(t_count, s_count);
            for (std::size_t t = 0; t < t_count; ++t)
                for (std::size_t s = 0; s < s_count; ++s)
                    logb.at(t, s) = hmm.emissions[s].frame_loglik(seq.row(t));

            Matrix la(t_count, s_count, -std::numeric_limits<double>::infinity());
            la.at(0, 0) = logb.at(0, 0);
            for (std::size_t t = 1; t < t_count; ++t)
                for (std::size_t s = 0; s < s_count; ++s) {
                    double acc = la.at(t - 1, s) + hmm.log_trans.at(s, s);
                    if (s > 0)
                        acc = detail::log_add(acc,
                                              la.at(t - 1, s - 1) + hmm.log_trans.at(s - 1, s));
                    la.at(t, s) = acc + logb.at(t, s);
                }
            std::vector<double> last(s_count);
            for (std::size_t s = 0; s < s_count; ++s) last[s] = la.at(t_count - 1, s);
            double ll = logsumexp(last);
            total_ll += ll;

            Matrix lb(t_count, s_count, 0.0);
            for (std::size_t ti = t_count - 1; ti-- > 0;) {
                for (std::size_t s = 0; s < s_count; ++s) {
                    double acc = hmm.log_trans.at(s, s) + logb.at(ti + 1, s) + lb.at(ti + 1, s);
                    if (s + 1 < s_count)
                        acc = detail::log_add(acc, hmm.log_trans.at(s, s + 1) +
                                                       logb.at(ti + 1, s + 1) +
                                                       lb.at(ti + 1, s + 1));
                    lb.at(ti, s) = acc;
                }
            }

            for (std::size_t t = 0; t < t_count; ++t) {
                for (std::size_t s = 0; s < s_count; ++s) {
                    double lgamma = la.at(t, s) + lb.at(t, s) - ll;
                    if (std::isinf(lgamma)) continue;
                    double gamma = std::exp(lgamma);
                    state_occ[s] += gamma;
                    // split gamma across emission components
                    std::vector<double> terms(m_count);
                    for (std::size_t m = 0; m < m_count; ++m)
                        terms[m] = std::log(hmm.emissions[s].weights[m]) +
                                   hmm.emissions[s].components[m].log_density(seq.row(t));
                    double lse = logsumexp(terms);
                    for (std::size_t m = 0; m < m_count; ++m) {
                        double w = gamma * std::exp(terms[m] - lse);
                        comp_occ[s][m] += w;
                        for (std::size_t c = 0; c < d; ++c)
                            mean_acc[s][m][c] += w * seq.at(t, c);
                        // raw second moments; recentred in the M step
                        if (cov_kind == CovKind::Diagonal) {
                            for (std::size_t c = 0; c < d; ++c)
                                var_acc[s][m][c] += w * seq.at(t, c) * seq.at(t, c);
                        } else {
                            for (std::size_t a = 0; a < d; ++a)
                                for (std::size_t b = 0; b < d; ++b)
                                    full_acc[s][m].at(a, b) += w * seq.at(t, a) * seq.at(t, b);
                        }
                    }
                    if (t + 1 < t_count) {
                        for (std::size_t s2 = s; s2 <= std::min(s + 1, s_count - 1); ++s2) {
                            double lxi = la.at(t, s) + hmm.log_trans.at(s, s2) +
                                         logb.at(t + 1, s2) + lb.at(t + 1, s2) - ll;
                            if (!std::isinf(lxi)) trans_num.at(s, s2) += std::exp(lxi);
                        }
                    }
                }
            }
        }

        hmm.loglik_history.push_back(total_ll);
        if (total_ll - prev_ll < 1e-6 && iter > 0) break;
        prev_ll = total_ll;

        // M step: transitions (band preserved, last state absorbing)
        for (std::size_t s = 0; s + 1 < s_count; ++s) {
            double denom = trans_num.at(s, s) + trans_num.at(s, s + 1);
            if (denom > 1e-10) {
                hmm.log_trans.at(s, s) = std::log(trans_num.at(s, s) / denom);
                hmm.log_trans.at(s, s + 1) = std::log(trans_num.at(s, s + 1) / denom);
            }
        }
        // M step: emissions
        for (std::size_t s = 0; s < s_count; ++s) {
            double occ = 0.0;
            for (std::size_t m = 0; m < m_count; ++m) occ += comp_occ[s][m];
            if (occ < 1e-10) continue;
            for (std::size_t m = 0; m < m_count; ++m) {
                double nk = comp_occ[s][m];
                if (nk < 1e-10) continue;
                hmm.emissions[s].weights[m] = nk / occ;
                auto& g = hmm.emissions[s].components[m];
                for (std::size_t c = 0; c < d; ++c) g.mean[c] = mean_acc[s][m][c] / nk;
                if (cov_kind == CovKind::Diagonal) {
                    for (std::size_t c = 0; c < d; ++c)
                        g.diag_var[c] =
                            std::max(var_acc[s][m][c] / nk - g.mean[c] * g.mean[c], kCovFloor);
                } else {
                    for (std::size_t a = 0; a < d; ++a) {
                        for (std::size_t b = 0; b < d; ++b)
                            g.full_cov.at(a, b) =
                                full_acc[s][m].at(a, b) / nk - g.mean[a] * g.mean[b];
                        g.full_cov.at(a, a) = std::max(g.full_cov.at(a, a), kCovFloor);
                    }
                }
                g.finalize();
            }
        }
    }
    return hmm;
}

inline HmmSet hmm_train_set(const std::vector<std::vector<Matrix>>& sequences_per_class,
                            int num_states, int num_components, CovKind cov_kind, int max_iters,
                            std::uint64_t seed) {
    HmmSet set;
    set.cov_kind = cov_kind;
    set.num_states = num_states;
    set.num_components = num_components;
    for (std::size_t c = 0; c < sequences_per_class.size(); ++c)
        set.per_class.push_back(hmm_train(sequences_per_class[c], num_states, num_components,
                                          cov_kind, max_iters, seed + c));
    return set;
}

inline std::vector<double> hmm_loglik(const HmmSet& set, const Matrix& seq) {
    std::vector<double> out;
    out.reserve(set.per_class.size());
    for (const auto& h : set.per_class) out.push_back(h.forward_loglik(seq));
    return out;
}

}  // namespace sb
