#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sb {

// Thrown for bad user-supplied configuration (CLI exits with code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for malformed input files (WAV, manifest, model containers).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }

    bool empty() const { return rows == 0 || cols == 0; }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Deterministic 64-bit splitmix generator. Used everywhere a seeded RNG is
// needed so results do not depend on libstdc++ distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n).
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % n);
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::uint64_t state_;
};

}  // namespace sb
