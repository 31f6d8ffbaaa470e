#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ffdyn/rng.hpp"

namespace ffdyn {

// Dense row-major matrix of doubles. The only numeric container in the
// library; weight matrices, activation batches and gradients all use it.
class Matrix2D {
public:
    Matrix2D() = default;
    Matrix2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix2D identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> flat() { return {data_.data(), data_.size()}; }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    bool same_shape(const Matrix2D& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix2D& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// a (m x k) times b (k x n). Throws ShapeError naming both shapes when
// the inner dimensions disagree.
Matrix2D matmul(const Matrix2D& a, const Matrix2D& b);

// a^T times b, without materializing the transpose. Used for weight
// gradients (inputs^T . delta).
Matrix2D matmul_transposed_a(const Matrix2D& a, const Matrix2D& b);

// Entries i.i.d. normal(0, 1/sqrt(fan_in)). Fills row-major, consuming a
// deterministic number of engine draws (two per entry pair).
Matrix2D init_weights(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace ffdyn
