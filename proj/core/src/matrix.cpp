#include "ffdyn/matrix.hpp"

#include <cblas.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>

#include "ffdyn/errors.hpp"

extern "C" void openblas_set_num_threads(int num_threads);

namespace ffdyn {

namespace {

// BLAS threading is pinned once, before the first product. One thread by
// default: results must not depend on how many experiment runs execute
// concurrently around the BLAS calls. FFDYN_BLAS_THREADS overrides for
// big single-run training; any fixed value keeps runs reproducible.
void configure_blas_once() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        int threads = 1;
        if (const char* env = std::getenv("FFDYN_BLAS_THREADS")) {
            int parsed = std::atoi(env);
            if (parsed >= 1) threads = parsed;
        }
        openblas_set_num_threads(threads);
    });
}

std::string shape_string(const Matrix2D& m) {
    return "(" + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) + ")";
}

}  // namespace

Matrix2D Matrix2D::identity(std::size_t n) {
    Matrix2D m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix2D matmul(const Matrix2D& a, const Matrix2D& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree, lhs " + shape_string(a) +
                         " vs rhs " + shape_string(b));
    }
    configure_blas_once();
    Matrix2D c(a.rows(), b.cols());
    if (c.size() == 0 || a.cols() == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans,
                static_cast<int>(a.rows()), static_cast<int>(b.cols()),
                static_cast<int>(a.cols()), 1.0, a.data(),
                static_cast<int>(a.cols()), b.data(), static_cast<int>(b.cols()),
                0.0, c.data(), static_cast<int>(c.cols()));
    return c;
}

Matrix2D matmul_transposed_a(const Matrix2D& a, const Matrix2D& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_transposed_a: row counts disagree, lhs " + shape_string(a) +
                         " vs rhs " + shape_string(b));
    }
    configure_blas_once();
    Matrix2D c(a.cols(), b.cols());
    if (c.size() == 0 || a.rows() == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans,
                static_cast<int>(a.cols()), static_cast<int>(b.cols()),
                static_cast<int>(a.rows()), 1.0, a.data(),
                static_cast<int>(a.cols()), b.data(), static_cast<int>(b.cols()),
                0.0, c.data(), static_cast<int>(c.cols()));
    return c;
}

Matrix2D init_weights(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) {
        throw InvalidArgument("init_weights: fan_in and fan_out must be >= 1");
    }
    Matrix2D w(fan_in, fan_out);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::span<double> flat = w.flat();
    std::size_t i = 0;
    while (i + 1 < flat.size()) {
        auto [z0, z1] = rng.normal_pair();
        flat[i++] = stddev * z0;
        flat[i++] = stddev * z1;
    }
    if (i < flat.size()) {
        flat[i] = stddev * rng.normal_pair().first;
    }
    return w;
}

}  // namespace ffdyn
