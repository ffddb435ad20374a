#pragma once

#include <cstddef>
#include <vector>

namespace ihlab {

// Dense row-major matrix of doubles. All exported operations keep entries
// finite; callers can assert with is_finite().
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool is_finite() const;
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Matrix& o) const = default;
};

// out[r] = a.row(r) * b   for each row of a; shapes (m x k) * (k x n) -> (m x n)
Matrix matmul(const Matrix& a, const Matrix& b);

// y += x * b where x is a length-k vector and b is (k x n); y has length n.
void vec_matmul_add(const double* x, const Matrix& b, double* y);

// y = x * b
std::vector<double> vec_matmul(const std::vector<double>& x, const Matrix& b);

double dot(const double* a, const double* b, std::size_t n);
double l2_norm(const std::vector<double>& v);

}  // namespace ihlab
