#include "ihlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ihlab {

bool ProbVector::valid(double tol) const {
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        sum += x;
    }
    return !p.empty() && std::abs(sum - 1.0) <= tol;
}

void softmax_inplace(double* logits, std::size_t n) {
    if (n == 0) throw std::invalid_argument("softmax: empty input");
    double mx = logits[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(logits[i])) throw std::invalid_argument("softmax: non-finite entry");
        mx = std::max(mx, logits[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logits[i] = std::exp(logits[i] - mx);
        sum += logits[i];
    }
    for (std::size_t i = 0; i < n; ++i) logits[i] /= sum;
}

ProbVector softmax(std::span<const double> logits) {
    ProbVector out;
    out.p.assign(logits.begin(), logits.end());
    softmax_inplace(out.p.data(), out.p.size());
    return out;
}

double entropy(const ProbVector& p) {
    if (!p.valid()) throw std::invalid_argument("entropy: invalid distribution");
    double h = 0.0;
    for (double x : p.p) {
        if (x > 0.0) h -= x * std::log(x);
    }
    return std::max(h, 0.0);
}

}  // namespace ihlab
