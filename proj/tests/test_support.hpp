#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "repdyn/config.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/tensor.hpp"

namespace repdyn::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data) {
        v = scale * rng.normal();
    }
    return m;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k)
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
    return c;
}

/// Random orthogonal matrix via Gram-Schmidt on Gaussian columns.
inline Matrix random_orthogonal(std::size_t n, SplitMix64& rng) {
    Matrix q = random_matrix(n, n, rng);
    for (std::size_t j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double d = 0;
                for (std::size_t i = 0; i < n; ++i) d += q(i, j) * q(i, k);
                for (std::size_t i = 0; i < n; ++i) q(i, j) -= d * q(i, k);
            }
        }
        double nrm = 0;
        for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    return q;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("repdyn_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

/// A run small enough to train in well under a second.
inline TrainRunConfig tiny_config(ModelKind model = ModelKind::mlp) {
    TrainRunConfig c;
    c.run_id = "tiny";
    c.model = model;
    c.width_k = 4;
    c.dataset.num_classes = 3;
    c.dataset.height = 4;
    c.dataset.width = 4;
    c.dataset.n_train = 60;
    c.dataset.n_test = 24;
    c.dataset.noise_std = 0.3;
    c.batch_size = 16;
    c.total_epochs = 6;
    c.optimizer.learning_rate = 1e-2;
    c.epoch_grid = uniform_epoch_grid(6, 2);
    return c;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace repdyn::testing
