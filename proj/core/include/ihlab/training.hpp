#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ihlab/model.hpp"
#include "ihlab/rng.hpp"

namespace ihlab {

// Training recipe for the toy organism. The corpus is synthetic: uniform
// random tokens with a random segment of length [seg_min, seg_max] repeated
// [rep_min, rep_max] times - the minimal distribution that rewards an
// induction circuit.
struct TrainSpec {
    std::size_t seq_len = 48;
    std::size_t seg_min = 2, seg_max = 8;
    std::size_t rep_min = 2, rep_max = 4;
    std::size_t batch_size = 8;
    std::size_t steps = 3000;
    double learning_rate = 3e-3;
    std::size_t warmup_steps = 100;  // linear warmup, then constant
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double init_std = 0.05;
    std::uint64_t seed = 0;

    void validate() const;  // steps >= 1 handled by caller for the 0-step case
};

// One synthetic training sequence (see TrainSpec).
TokenSeq make_train_sequence(const ModelConfig& cfg, const TrainSpec& spec,
                             RngStream& rng);

struct LossAndGrad {
    double loss = 0.0;       // mean next-token cross-entropy (nats)
    ModelWeights grad;       // same structure as the weights
};

// Exact gradients for the attention-only architecture, by reverse-mode
// differentiation of the forward pass. Loss is the mean over all predicted
// positions (t -> t+1) across the batch.
LossAndGrad loss_and_grad(const ModelWeights& w, const std::vector<TokenSeq>& batch);

// Gaussian init with std spec.init_std on all weight matrices.
ModelWeights init_weights(const ModelConfig& cfg, const TrainSpec& spec);

struct TrainResult {
    ModelWeights weights;
    std::vector<double> loss_trace;  // one entry per step
};

// Deterministic given spec.seed. Throws std::runtime_error with a diagnostic
// if the loss diverges to NaN. steps == 0 returns the initialization.
TrainResult train_toy_model(const ModelConfig& cfg, const TrainSpec& spec);

}  // namespace ihlab
