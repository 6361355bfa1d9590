#ifndef MACD_MATRIX_HPP
#define MACD_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macd/error.hpp"

namespace macd {

/// Dense row-major matrix of doubles. Thin value type; the heavy products are
/// delegated to Eigen through maps over the same storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(size_t i, size_t j) { return data_[i * cols_ + j]; }
    double operator()(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(size_t i) { return data_.data() + i * cols_; }
    const double* row(size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

namespace detail {
using EigenRowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EigenRowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;

inline ConstMap cmap(const Matrix& m) {
    return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}
inline Map map(Matrix& m) {
    return Map(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}
} // namespace detail

/// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.rows(), "matmul: inner dimensions differ (" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    Matrix c(a.rows(), b.cols());
    detail::map(c).noalias() = detail::cmap(a) * detail::cmap(b);
    return c;
}

/// C = A^T * B  (A: n x k, B: n x m -> k x m)
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    detail::require(a.rows() == b.rows(), "matmul_tn: row counts differ");
    Matrix c(a.cols(), b.cols());
    detail::map(c).noalias() = detail::cmap(a).transpose() * detail::cmap(b);
    return c;
}

/// C = A * B^T  (A: n x k, B: m x k -> n x m)
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    detail::require(a.cols() == b.cols(), "matmul_nt: column counts differ");
    Matrix c(a.rows(), b.rows());
    detail::map(c).noalias() = detail::cmap(a) * detail::cmap(b).transpose();
    return c;
}

/// Column sums as a 1 x cols matrix.
inline Matrix col_sums(const Matrix& m) {
    Matrix s(1, m.cols());
    for (size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        for (size_t j = 0; j < m.cols(); ++j) s(0, j) += r[j];
    }
    return s;
}

inline Matrix col_means(const Matrix& m) {
    Matrix s = col_sums(m);
    const double inv = 1.0 / static_cast<double>(m.rows());
    for (size_t j = 0; j < m.cols(); ++j) s(0, j) *= inv;
    return s;
}

/// In-place: add a 1 x cols row vector to every row.
inline void add_row_vector(Matrix& m, const Matrix& v) {
    detail::require(v.rows() == 1 && v.cols() == m.cols(), "add_row_vector: shape mismatch");
    for (size_t i = 0; i < m.rows(); ++i) {
        double* r = m.row(i);
        for (size_t j = 0; j < m.cols(); ++j) r[j] += v(0, j);
    }
}

inline bool all_finite(const Matrix& m) {
    for (double v : m.storage())
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace macd

#endif
