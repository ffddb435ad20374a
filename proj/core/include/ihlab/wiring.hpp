#pragma once

#include "ihlab/model.hpp"

namespace ihlab {

// Hand-wired two-layer induction circuit.
//
// The residual stream is partitioned into disjoint channel groups:
//   [0, V)            current-token identity (one-hot, written by embedding)
//   [V, 2V)           prediction channels (read by the unembedding)
//   [2V, 3V)          previous-token identity (written by the layer-0 head)
//   [3V, 3V+max_seq)  position (one-hot, written by the positional embedding)
//
// Head (0,0) attends to position t-1 via the position channels and copies
// the attended token identity into the previous-token group. Head (1,0)
// matches the current token against that group (K-composition) and copies
// the matched position's token identity into the prediction channels, which
// the unembedding maps back to logits. All other heads are zero.
//
// `sharpness` is the attention logit placed on the matched key (non-matches
// score 0); sharpness >= 20 gives effectively hard attention.

namespace wired {
inline constexpr HeadId kPrevTokenHead{0, 0};
inline constexpr HeadId kInductionHead{1, 0};
// Logit gain on the prediction channels.
inline constexpr double kCopyGain = 8.0;
}  // namespace wired

// Minimal config able to hold the construction: d_head = max(vocab, max_seq),
// d_model = n_heads * d_head (must cover 3*vocab + max_seq channels).
ModelConfig wired_config(std::size_t vocab_size, std::size_t max_seq,
                         std::size_t n_heads = 4, std::size_t n_layers = 2);

// Throws std::invalid_argument when cfg cannot embed the construction
// (n_layers < 2, d_head < max(vocab, max_seq), d_model < 3*vocab + max_seq).
ModelWeights wire_induction_model(const ModelConfig& cfg, double sharpness);

}  // namespace ihlab
