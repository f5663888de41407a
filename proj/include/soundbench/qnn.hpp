#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "soundbench/core.hpp"
#include "soundbench/postproc.hpp"

namespace sb {

// Nearest-neighbor search over per-subspace quantized vectors. Training
// vectors are stored as P small centroid ids instead of d reals.
struct QnnModel {
    std::size_t parts = 1;       // P
    std::size_t codewords = 1;   // K
    std::vector<std::size_t> part_offsets;  // P+1 boundaries into the feature dim
    std::vector<Codebook> codebooks;        // one per subspace
    std::vector<std::uint32_t> codes;       // N x P centroid ids, row-major
    std::vector<int> labels;
    // Score is -sqrt(sum of subspace centroid distances). When
    // conventional_distance is set, squared distances are summed instead.
    bool conventional_distance = false;

    // per-subspace K x K centroid-to-centroid distance tables
    std::vector<Matrix> distance_tables;

    std::size_t dim() const { return part_offsets.back(); }
};

namespace detail {

inline void qnn_build_tables(QnnModel& m) {
    m.distance_tables.clear();
    for (std::size_t p = 0; p < m.parts; ++p) {
        const Matrix& c = m.codebooks[p].centroids;
        Matrix table(c.rows, c.rows);
        for (std::size_t i = 0; i < c.rows; ++i)
            for (std::size_t j = 0; j < c.rows; ++j) {
                double d2 = squared_distance(c.row(i), c.row(j), c.cols);
                table.at(i, j) = m.conventional_distance ? d2 : std::sqrt(d2);
            }
        m.distance_tables.push_back(std::move(table));
    }
}

}  // namespace detail

// Splits the feature dimension into P contiguous blocks (remainder to
// the last block), runs k-means per block, stores quantized codes.
inline QnnModel qnn_train(const Matrix& vectors, const std::vector<int>& labels, std::size_t parts,
                          std::size_t codewords, std::uint64_t seed,
                          bool conventional_distance = false) {
    if (vectors.rows == 0) throw ConfigError("qnn_train: empty training set");
    if (codewords > vectors.rows) throw ConfigError("qnn_train: K larger than training size");
    std::size_t d = vectors.cols;
    if (parts < 1 || parts > d) throw ConfigError("qnn_train: P out of range");

    QnnModel m;
    m.parts = parts;
    m.codewords = codewords;
    m.conventional_distance = conventional_distance;
    m.labels = labels;
    std::size_t base = d / parts;
    for (std::size_t p = 0; p <= parts; ++p)
        m.part_offsets.push_back(p == parts ? d : p * base);

    for (std::size_t p = 0; p < parts; ++p) {
        std::size_t lo = m.part_offsets[p], hi = m.part_offsets[p + 1];
        Matrix sub(vectors.rows, hi - lo);
        for (std::size_t i = 0; i < vectors.rows; ++i)
            for (std::size_t c = lo; c < hi; ++c) sub.at(i, c - lo) = vectors.at(i, c);
        m.codebooks.push_back(kmeans_train(sub, codewords, seed + p));
    }

    m.codes.resize(vectors.rows * parts);
    for (std::size_t i = 0; i < vectors.rows; ++i)
        for (std::size_t p = 0; p < parts; ++p) {
            std::size_t lo = m.part_offsets[p];
            std::vector<double> x(vectors.row(i) + lo, vectors.row(i) + m.part_offsets[p + 1]);
            m.codes[i * parts + p] =
                static_cast<std::uint32_t>(nearest_centroid(m.codebooks[p].centroids, x.data()));
        }
    detail::qnn_build_tables(m);
    return m;
}

// Ties resolve to the lowest class id.
inline int qnn_predict(const QnnModel& m, const std::vector<double>& x) {
    if (x.size() != m.dim()) throw ConfigError("qnn_predict: dimension mismatch");
    std::vector<std::uint32_t> code(m.parts);
    for (std::size_t p = 0; p < m.parts; ++p) {
        std::size_t lo = m.part_offsets[p];
        std::vector<double> sub(x.begin() + static_cast<long>(lo),
                                x.begin() + static_cast<long>(m.part_offsets[p + 1]));
        code[p] = static_cast<std::uint32_t>(nearest_centroid(m.codebooks[p].centroids, sub.data()));
    }
    std::size_t n = m.labels.size();
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t p = 0; p < m.parts; ++p)
            sum += m.distance_tables[p].at(code[p], m.codes[i * m.parts + p]);
        if (sum < best || (sum == best && m.labels[i] < best_label)) {
            best = sum;
            best_label = m.labels[i];
        }
    }
    return best_label;
}

// g_QNN(x; c) per class: negative root of the best summed subspace
// distance within the class.
inline std::vector<double> qnn_scores(const QnnModel& m, const std::vector<double>& x,
                                      int num_classes) {
    std::vector<std::uint32_t> code(m.parts);
    for (std::size_t p = 0; p < m.parts; ++p) {
        std::size_t lo = m.part_offsets[p];
        std::vector<double> sub(x.begin() + static_cast<long>(lo),
                                x.begin() + static_cast<long>(m.part_offsets[p + 1]));
        code[p] = static_cast<std::uint32_t>(nearest_centroid(m.codebooks[p].centroids, sub.data()));
    }
    std::vector<double> best(static_cast<std::size_t>(num_classes),
                             std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        double sum = 0.0;
        for (std::size_t p = 0; p < m.parts; ++p)
            sum += m.distance_tables[p].at(code[p], m.codes[i * m.parts + p]);
        std::size_t c = static_cast<std::size_t>(m.labels[i] - 1);
        if (sum < best[c]) best[c] = sum;
    }
    std::vector<double> g(best.size());
    for (std::size_t c = 0; c < best.size(); ++c)
        g[c] = std::isinf(best[c]) ? -std::numeric_limits<double>::infinity()
                                   : -std::sqrt(best[c]);
    return g;
}

}  // namespace sb
