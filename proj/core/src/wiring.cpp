#include "ihlab/wiring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ihlab {

ModelConfig wired_config(std::size_t vocab_size, std::size_t max_seq,
                         std::size_t n_heads, std::size_t n_layers) {
    ModelConfig cfg;
    cfg.n_layers = n_layers;
    cfg.n_heads = n_heads;
    cfg.d_head = std::max(vocab_size, max_seq);
    cfg.d_model = n_heads * cfg.d_head;
    cfg.vocab_size = vocab_size;
    cfg.max_seq = max_seq;
    cfg.validate();
    return cfg;
}

ModelWeights wire_induction_model(const ModelConfig& cfg, double sharpness) {
    cfg.validate();
    const std::size_t V = cfg.vocab_size;
    const std::size_t tok_off = 0;
    const std::size_t pred_off = V;
    const std::size_t prev_off = 2 * V;
    const std::size_t pos_off = 3 * V;

    if (cfg.n_layers < 2)
        throw std::invalid_argument("wire_induction_model: needs >= 2 layers");
    if (cfg.d_head < std::max(V, cfg.max_seq))
        throw std::invalid_argument("wire_induction_model: d_head too small for the construction");
    if (cfg.d_model < 3 * V + cfg.max_seq)
        throw std::invalid_argument("wire_induction_model: d_model too small for the construction");

    ModelWeights w = ModelWeights::zeros(cfg);

    for (std::size_t v = 0; v < V; ++v) w.token_embed.at(v, tok_off + v) = 1.0;
    for (std::size_t p = 0; p < cfg.max_seq; ++p) w.pos_embed.at(p, pos_off + p) = 1.0;
    for (std::size_t v = 0; v < V; ++v) w.unembed.at(pred_off + v, v) = 1.0;

    // Attention logits are scaled by 1/sqrt(d_head) in the forward pass;
    // fold the compensation into W_Q so a matched key scores `sharpness`.
    const double q_gain = sharpness * std::sqrt(static_cast<double>(cfg.d_head));

    // Layer-0 previous-token head: query = one-hot(position t), key at
    // position j = one-hot(j+1), so the only match is j = t-1. Position 0
    // attends to itself (uniform over the single causal slot).
    HeadWeights& prev = w.head(wired::kPrevTokenHead);
    for (std::size_t p = 0; p < cfg.max_seq; ++p)
        prev.w_q.at(pos_off + p, p) = q_gain;
    for (std::size_t j = 0; j + 1 < cfg.max_seq; ++j)
        prev.w_k.at(pos_off + j, j + 1) = 1.0;
    for (std::size_t v = 0; v < V; ++v) {
        prev.w_v.at(tok_off + v, v) = 1.0;
        prev.w_o.at(v, prev_off + v) = 1.0;
    }

    // Layer-1 induction head: match current token identity against the
    // previous-token group written above, copy the matched token identity
    // into the prediction channels.
    HeadWeights& ind = w.head(wired::kInductionHead);
    for (std::size_t v = 0; v < V; ++v) {
        ind.w_q.at(tok_off + v, v) = q_gain;
        ind.w_k.at(prev_off + v, v) = 1.0;
        ind.w_v.at(tok_off + v, v) = 1.0;
        ind.w_o.at(v, pred_off + v) = wired::kCopyGain;
    }
    // Position 0 has no previous token (the layer-0 head self-attends there
    // and writes x_0 into the previous-token group); cancel its key so it
    // never poses as a match.
    for (std::size_t v = 0; v < V; ++v) ind.w_k.at(pos_off + 0, v) = -1.0;

    return w;
}

}  // namespace ihlab
