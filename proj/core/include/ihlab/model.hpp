#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ihlab/matrix.hpp"

namespace ihlab {

using Token = std::uint32_t;
using TokenSeq = std::vector<Token>;

// Attention-only decoder: no MLPs, no layer norm, learned absolute
// positional embeddings, untied unembedding.
struct ModelConfig {
    std::size_t n_layers = 0;
    std::size_t n_heads = 0;  // per layer
    std::size_t d_model = 0;
    std::size_t d_head = 0;
    std::size_t vocab_size = 0;
    std::size_t max_seq = 0;

    std::size_t total_heads() const { return n_layers * n_heads; }

    // Throws std::invalid_argument unless n_heads*d_head == d_model,
    // max_seq >= 2 and vocab_size >= 4.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct HeadId {
    std::size_t layer = 0;
    std::size_t head = 0;

    auto operator<=>(const HeadId&) const = default;
};

struct HeadWeights {
    Matrix w_q;  // d_model x d_head
    Matrix w_k;  // d_model x d_head
    Matrix w_v;  // d_model x d_head
    Matrix w_o;  // d_head x d_model

    bool operator==(const HeadWeights&) const = default;
};

struct ModelWeights {
    ModelConfig cfg;
    Matrix token_embed;  // vocab_size x d_model
    Matrix pos_embed;    // max_seq x d_model
    std::vector<std::vector<HeadWeights>> heads;  // [layer][head]
    Matrix unembed;  // d_model x vocab_size

    static ModelWeights zeros(const ModelConfig& cfg);

    const HeadWeights& head(HeadId id) const { return heads[id.layer][id.head]; }
    HeadWeights& head(HeadId id) { return heads[id.layer][id.head]; }

    // Shape consistency with cfg plus finiteness of every matrix.
    void validate() const;

    bool operator==(const ModelWeights&) const = default;
};

// Per-head intervention points for a forward pass. A head may appear in at
// most one of patch and scale. Patch replaces the head's output vectors
// (pre-W_O) at every position, or only the final position when
// patch_final_only is set; scale multiplies them.
struct HookSet {
    bool capture_all = false;
    std::set<HeadId> capture;
    std::map<HeadId, Matrix> patch;  // seq x d_head replacement
    bool patch_final_only = false;
    std::map<HeadId, double> scale;

    bool wants_capture(HeadId id) const {
        return capture_all || capture.count(id) > 0;
    }
    bool empty_interventions() const { return patch.empty() && scale.empty(); }
    void validate() const;  // throws on patch/scale overlap
};

struct HeadCapture {
    Matrix attn;      // seq x seq, causal rows (valid probability vectors)
    Matrix head_out;  // seq x d_head, post-hook (pre-W_O)
};

struct ActivationCache {
    std::map<HeadId, HeadCapture> heads;
    std::vector<Matrix> residual;  // n_layers+1 snapshots, each seq x d_model
    Matrix logits;                 // seq x vocab

    bool has(HeadId id) const { return heads.count(id) > 0; }
};

}  // namespace ihlab
