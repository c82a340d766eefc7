#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rlab {

using Vec = std::vector<double>;

// Small dense row-major matrix. Sizes here never exceed a handful of rows,
// so there is no attempt at blocking or BLAS.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    // Matrix whose j-th column is columns[j].
    static Matrix from_columns(std::span<const Vec> columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec column(std::size_t j) const;
    Matrix transpose() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Vec operator*(const Matrix& m, std::span<const double> x);
Matrix operator*(const Matrix& a, const Matrix& b);

// Bareiss fraction-free elimination with partial pivoting.
double determinant(Matrix m);

// Throws NumericalError when the matrix is singular to working precision.
Matrix inverse(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace rlab
