#include "ihlab/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace ihlab {

bool Matrix::is_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

void vec_matmul_add(const double* x, const Matrix& b, double* y) {
    for (std::size_t k = 0; k < b.rows; ++k) {
        const double xv = x[k];
        if (xv == 0.0) continue;
        const double* brow = b.row(k);
        for (std::size_t j = 0; j < b.cols; ++j) y[j] += xv * brow[j];
    }
}

std::vector<double> vec_matmul(const std::vector<double>& x, const Matrix& b) {
    if (x.size() != b.rows) throw std::invalid_argument("vec_matmul: shape mismatch");
    std::vector<double> y(b.cols, 0.0);
    vec_matmul_add(x.data(), b, y.data());
    return y;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace ihlab
