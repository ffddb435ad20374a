#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ihlab {

// Probability distribution over a vocabulary. Entries are >= 0 and sum to 1
// within 1e-9; entropy is measured in nats.
struct ProbVector {
    std::vector<double> p;

    std::size_t size() const { return p.size(); }
    bool valid(double tol = 1e-9) const;
};

// Numerically stable softmax: exp(l_i - max) / sum exp(l_j - max).
// Throws std::invalid_argument on empty input or non-finite entries.
ProbVector softmax(std::span<const double> logits);

// Shannon entropy in nats, with 0*ln(0) := 0. Input must be a valid
// ProbVector; result lies in [0, ln |V|].
double entropy(const ProbVector& p);

// In-place softmax over a raw buffer (same definition as softmax()).
void softmax_inplace(double* logits, std::size_t n);

}  // namespace ihlab
