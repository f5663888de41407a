#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "soundbench/core.hpp"

namespace sb {

// Stores the full training set; prediction is a Euclidean k-NN vote.
struct KnnStore {
    Matrix vectors;           // N x d
    std::vector<int> labels;  // class ids, 1-based
    int k = 1;
};

struct KnnVote {
    int label = 0;
    std::map<int, int> votes;
};

inline KnnStore knn_train(const Matrix& vectors, const std::vector<int>& labels, int k) {
    if (vectors.rows == 0) throw ConfigError("knn_train: empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > vectors.rows)
        throw ConfigError("knn_train: k out of range");
    return KnnStore{vectors, labels, k};
}

// Vote tie is broken by the class of the single nearest neighbor among
// the tied classes.
inline KnnVote knn_predict(const KnnStore& store, const std::vector<double>& x) {
    if (x.size() != store.vectors.cols) throw ConfigError("knn_predict: dimension mismatch");
    std::size_t n = store.vectors.rows;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i)
        dist[i] = {squared_distance(store.vectors.row(i), x.data(), x.size()), i};
    std::size_t k = static_cast<std::size_t>(store.k);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

    KnnVote result;
    for (std::size_t i = 0; i < k; ++i) ++result.votes[store.labels[dist[i].second]];
    int best_count = 0;
    for (const auto& [c, v] : result.votes) best_count = std::max(best_count, v);
    // nearest neighbor whose class is among the tied leaders decides
    for (std::size_t i = 0; i < k; ++i) {
        int c = store.labels[dist[i].second];
        if (result.votes[c] == best_count) {
            result.label = c;
            break;
        }
    }
    return result;
}

}  // namespace sb
