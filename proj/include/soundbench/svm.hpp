#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

enum class KernelKind { Linear, Polynomial, Rbf, Sigmoid, Chi2 };

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;
    double coef0 = 0.0;
    int degree = 3;
};

inline double kernel_eval(const KernelSpec& spec, const double* x, const double* y,
                          std::size_t n) {
    switch (spec.kind) {
        case KernelKind::Linear: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
            return s;
        }
        case KernelKind::Polynomial: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
            return std::pow(spec.gamma * s + spec.coef0, spec.degree);
        }
        case KernelKind::Rbf:
            return std::exp(-spec.gamma * squared_distance(x, y, n));
        case KernelKind::Sigmoid: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
            return std::tanh(spec.gamma * s + spec.coef0);
        }
        case KernelKind::Chi2: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (x[i] < 0.0 || y[i] < 0.0)
                    throw ConfigError("chi2 kernel requires non-negative inputs");
                double sum = x[i] + y[i];
                if (sum > 0.0) {
                    double d = x[i] - y[i];
                    s += d * d / sum;
                }
            }
            return 1.0 - 2.0 * s;
        }
    }
    return 0.0;
}

inline double kernel_eval(const KernelSpec& spec, const std::vector<double>& x,
                          const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("kernel_eval: dimension mismatch");
    return kernel_eval(spec, x.data(), y.data(), x.size());
}

// One binary machine h_{c,d}: positive class votes for `pos_class`.
struct SvmMachine {
    int pos_class = 0;
    int neg_class = 0;
    Matrix support_vectors;
    std::vector<double> coef;  // alpha_i * y_i
    double bias = 0.0;
};

struct SvmModel {
    KernelSpec kernel;
    double box = 10.0;  // misclassification regulator Q
    int num_classes = 0;
    std::vector<SvmMachine> machines;  // one per unordered class pair
};

inline double svm_decision(const SvmMachine& m, const KernelSpec& spec,
                           const std::vector<double>& x) {
    double h = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.rows; ++i)
        h += m.coef[i] * kernel_eval(spec, m.support_vectors.row(i), x.data(), x.size());
    return h;
}

namespace detail {

// Soft-margin dual by SMO with maximal-violating-pair working-set
// selection. min 1/2 a'Qa - e'a, 0 <= a <= box, y'a = 0.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
};

inline SmoResult smo_solve(const Matrix& x, const std::vector<double>& y, const KernelSpec& spec,
                           double box, double tol = 1e-3, int max_iters = 100000) {
    std::size_t n = x.rows;
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = kernel_eval(spec, x.row(i), x.row(j), x.cols);
            if (!std::isfinite(v)) throw ConfigError("svm: non-finite kernel value");
            k.at(i, j) = v;
            k.at(j, i) = v;
        }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of the dual objective

    for (int iter = 0; iter < max_iters; ++iter) {
        // i: argmax -y_i grad_i over the upward-feasible set
        // j: argmin -y_j grad_j over the downward-feasible set
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t sel_i = n, sel_j = n;
        for (std::size_t t = 0; t < n; ++t) {
            bool up = (y[t] > 0 && alpha[t] < box) || (y[t] < 0 && alpha[t] > 0);
            bool down = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < box);
            double v = -y[t] * grad[t];
            if (up && v > gmax) {
                gmax = v;
                sel_i = t;
            }
            if (down && v < gmin) {
                gmin = v;
                sel_j = t;
            }
        }
        if (sel_i == n || sel_j == n || gmax - gmin < tol) break;

        std::size_t i = sel_i, j = sel_j;
        double yi = y[i], yj = y[j];
        double quad = k.at(i, i) + k.at(j, j) - 2.0 * yi * yj * k.at(i, j);
        if (quad <= 0.0) quad = 1e-12;
        double delta = (gmax - gmin) / quad;

        // step along the feasible direction, clipped to the box
        double old_ai = alpha[i], old_aj = alpha[j];
        double ai = old_ai + yi * delta;
        double aj = old_aj - yj * delta;
        double sum = yi * old_ai + yj * old_aj;
        if (ai < 0.0) ai = 0.0;
        if (ai > box) ai = box;
        aj = yj * (sum - yi * ai);
        if (aj < 0.0) {
            aj = 0.0;
            ai = yi * (sum - yj * aj);
        }
        if (aj > box) {
            aj = box;
            ai = yi * (sum - yj * aj);
        }
        if (ai < 0.0) ai = 0.0;
        if (ai > box) ai = box;

        double dai = ai - old_ai, daj = aj - old_aj;
        if (std::abs(dai) < 1e-15 && std::abs(daj) < 1e-15) break;
        alpha[i] = ai;
        alpha[j] = aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (yi * dai * k.at(i, t) + yj * daj * k.at(j, t));
    }

    // bias from free support vectors, midpoint of bounds otherwise
    double rho;
    double free_sum = 0.0;
    int free_count = 0;
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        double yg = y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < box) {
            free_sum += yg;
            ++free_count;
        } else if ((y[t] > 0 && alpha[t] == 0.0) || (y[t] < 0 && alpha[t] == box)) {
            ub = std::min(ub, yg);
        } else {
            lb = std::max(lb, yg);
        }
    }
    rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;

    SmoResult res;
    res.alpha = std::move(alpha);
    res.bias = -rho;
    return res;
}

}  // namespace detail

// 1v1 strategy: one machine per unordered class pair.
inline SvmModel svm_train_1v1(const Matrix& vectors, const std::vector<int>& labels,
                              const KernelSpec& spec, double box, double tol = 1e-3) {
    SvmModel model;
    model.kernel = spec;
    model.box = box;
    int num_classes = 0;
    for (int l : labels) num_classes = std::max(num_classes, l);
    model.num_classes = num_classes;
    if (num_classes < 2) throw ConfigError("svm_train_1v1: need at least 2 classes");

    for (int c = 1; c <= num_classes; ++c) {
        for (int d = c + 1; d <= num_classes; ++d) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c || labels[i] == d) idx.push_back(i);
            Matrix sub(idx.size(), vectors.cols);
            std::vector<double> y(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t cc = 0; cc < vectors.cols; ++cc)
                    sub.at(i, cc) = vectors.at(idx[i], cc);
                y[i] = labels[idx[i]] == c ? 1.0 : -1.0;
            }
            detail::SmoResult res;
            try {
                res = detail::smo_solve(sub, y, spec, box, tol);
            } catch (const ConfigError& e) {
                throw ConfigError("svm pair (" + std::to_string(c) + "," + std::to_string(d) +
                                  "): " + e.what());
            }
            SvmMachine m;
            m.pos_class = c;
            m.neg_class = d;
            m.bias = res.bias;
            std::vector<std::size_t> sv;
            for (std::size_t i = 0; i < idx.size(); ++i)
                if (res.alpha[i] > 0.0) sv.push_back(i);
            m.support_vectors = Matrix(sv.size(), vectors.cols);
            for (std::size_t i = 0; i < sv.size(); ++i) {
                for (std::size_t cc = 0; cc < vectors.cols; ++cc)
                    m.support_vectors.at(i, cc) = sub.at(sv[i], cc);
                m.coef.push_back(res.alpha[sv[i]] * y[sv[i]]);
            }
            model.machines.push_back(std::move(m));
        }
    }
    return model;
}

struct SvmVote {
    int label = 0;
    std::vector<int> votes;  // per class, index label-1
};

// Each machine casts one vote; h > 0 votes the positive class, otherwise
// (including h == 0) the negative one. Vote ties break by summed |h|
// margin over the tied classes, then lowest class id.
inline SvmVote svm_predict(const SvmModel& model, const std::vector<double>& x) {
    SvmVote result;
    result.votes.assign(static_cast<std::size_t>(model.num_classes), 0);
    std::vector<double> margin(static_cast<std::size_t>(model.num_classes), 0.0);
    for (const auto& m : model.machines) {
        double h = svm_decision(m, model.kernel, x);
        int winner = h > 0.0 ? m.pos_class : m.neg_class;
        ++result.votes[static_cast<std::size_t>(winner - 1)];
        margin[static_cast<std::size_t>(m.pos_class - 1)] += std::abs(h);
        margin[static_cast<std::size_t>(m.neg_class - 1)] += std::abs(h);
    }
    int best = 1;
    for (int c = 2; c <= model.num_classes; ++c) {
        std::size_t ci = static_cast<std::size_t>(c - 1), bi = static_cast<std::size_t>(best - 1);
        if (result.votes[ci] > result.votes[bi] ||
            (result.votes[ci] == result.votes[bi] && margin[ci] > margin[bi]))
            best = c;
    }
    result.label = best;
    return result;
}

// Largest KKT violation over the machine's own training points, used by
// the optimization-invariant checks.
inline double svm_kkt_violation(const SvmModel& model, const SvmMachine& m, const Matrix& vectors,
                                const std::vector<int>& labels) {
    double worst = 0.0;
    // reconstruct the pair's training subset
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != m.pos_class && labels[i] != m.neg_class) continue;
        std::vector<double> x(vectors.row(i), vectors.row(i) + vectors.cols);
        double yi = labels[i] == m.pos_class ? 1.0 : -1.0;
        double f = yi * svm_decision(m, model.kernel, x);
        // find alpha of this point (0 if not a support vector)
        double a = 0.0;
        for (std::size_t s = 0; s < m.support_vectors.rows; ++s) {
            if (squared_distance(m.support_vectors.row(s), x.data(), x.size()) == 0.0) {
                a = std::abs(m.coef[s]);
                break;
            }
        }
        double v = 0.0;
        if (a <= 1e-12)
            v = std::max(0.0, 1.0 - f);          // alpha = 0 -> y f >= 1
        else if (a >= model.box - 1e-12)
            v = std::max(0.0, f - 1.0);          // alpha = box -> y f <= 1
        else
            v = std::abs(f - 1.0);               // free -> y f = 1
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace sb
