#pragma once

#include <string>

#include "ihlab/model.hpp"
#include "ihlab/rng.hpp"

namespace ihlab {

// Randomized copying challenge:
//   x_0..x_n, x_prefix, x_copy, x_{n+1}..x_{L-1}, x_prefix
// All L filler tokens plus {x_prefix, x_copy} are pairwise distinct; the
// correct continuation after the final x_prefix is x_copy. Total length L+3.
struct CopyTaskInstance {
    TokenSeq clean;
    Token prefix_token = 0;
    Token copy_token = 0;
    std::size_t first_pair_pos = 0;    // index of the first x_prefix
    std::size_t final_prefix_pos = 0;  // index of the trailing x_prefix (last)
    Token target = 0;                  // = copy_token

    std::size_t copy_pos() const { return first_pair_pos + 1; }
    std::string to_json_line() const;
};

// Clean instance with x_copy replaced by a random token != x_copy; differs
// from clean at exactly one index.
struct CorruptedInstance {
    TokenSeq tokens;
    Token replacement = 0;
};

// Requires vocab_size >= L + 3 (distinctness headroom) and 0 <= n < L.
// Deterministic given the rng state.
CopyTaskInstance make_copy_instance(std::size_t vocab_size, std::size_t L,
                                    std::size_t n, RngStream& rng);

// n drawn uniformly in [0, L).
CopyTaskInstance make_copy_instance(std::size_t vocab_size, std::size_t L,
                                    RngStream& rng);

CorruptedInstance corrupt_instance(const CopyTaskInstance& inst, std::size_t vocab_size,
                                   RngStream& rng);

}  // namespace ihlab
