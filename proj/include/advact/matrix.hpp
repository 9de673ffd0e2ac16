#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <thread>
#include <vector>

#include "advact/error.hpp"

namespace advact {

// Dense row-major 2-D array of doubles. The sole numeric container of the
// library. Immutable-after-construction by convention: layers and the tape
// treat matrices as values and never mutate shared ones.
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix scalar(double v) {
        Matrix m(1, 1);
        m.data_[0] = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // Throws NumericError naming `context` if any entry is NaN/Inf.
    void require_finite(const std::string& context) const {
        if (!all_finite())
            throw NumericError("non-finite value in " + context + " (" + shape_str() + ")");
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

namespace detail {

// Partitions [0, n) rows across workers. Each worker writes a disjoint row
// range, so the result is independent of the partitioning.
inline void parallel_rows(std::size_t n, std::size_t work_per_row,
                          const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::size_t workers = std::min<std::size_t>(hw, n);
    // Not worth spawning threads for small kernels.
    if (workers <= 1 || n * work_per_row < (1u << 16)) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.cols(), q = b.cols();
    detail::parallel_rows(a.rows(), n * q, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* crow = c.data() + i * q;
            // k-outer accumulation: contiguous access on b, fixed summation
            // order per element regardless of row partitioning.
            for (std::size_t k = 0; k < n; ++k) {
                const double aik = a(i, k);
                const double* brow = b.data() + k * q;
                for (std::size_t j = 0; j < q; ++j) crow[j] += aik * brow[j];
            }
        }
    });
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ShapeError("add: shape mismatch " + a.shape_str() + " + " + b.shape_str());
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ShapeError("sub: shape mismatch " + a.shape_str() + " - " + b.shape_str());
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ShapeError("hadamard: shape mismatch " + a.shape_str() + " * " + b.shape_str());
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= b.data()[i];
    return c;
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
    return c;
}

// Adds a 1xC row vector to every row of a (bias broadcast).
inline Matrix add_rows(const Matrix& a, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != a.cols())
        throw ShapeError("add_rows: " + a.shape_str() + " + " + row.shape_str());
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += row(0, j);
    return c;
}

template <typename F>
Matrix map(const Matrix& a, F&& f) {
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = f(c.data()[i]);
    return c;
}

inline double sum_all(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i];
    return s;
}

inline double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

inline double l2_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

// Elementwise clamp to [-bound, bound].
inline Matrix clamp_gradient(const Matrix& g, double bound) {
    if (!(bound > 0.0)) throw DomainError("clamp_gradient: bound must be > 0");
    Matrix c = g;
    for (std::size_t i = 0; i < c.size(); ++i)
        c.data()[i] = std::clamp(c.data()[i], -bound, bound);
    return c;
}

} // namespace advact
