#pragma once

#include <functional>
#include <optional>

#include "ihlab/model.hpp"
#include "ihlab/numerics.hpp"
#include "ihlab/rng.hpp"

namespace ihlab {

struct ForwardResult {
    Matrix logits;  // seq x vocab (same object as cache.logits)
    ActivationCache cache;
};

// Full causal forward pass with hooks applied at the head-output point
// (post-attention, pre-W_O). Logits at position i depend only on tokens <= i.
// Throws on out-of-vocabulary tokens, overlong sequences and patch shape
// mismatches.
ForwardResult forward(const ModelWeights& w, const TokenSeq& tokens,
                      const HookSet& hooks = {});

// Number of forward() calls since process start; used by tests to verify
// patching pass-count accounting.
std::uint64_t forward_pass_count();

enum class DecodeKind { Greedy, Temperature };

struct DecodeSpec {
    DecodeKind kind = DecodeKind::Greedy;
    double temperature = 1.0;
};

// Per-step multiplicative factors for a set of heads; step is 1-based over
// generated tokens. Used by the descaling policies.
using StepScaleFn = std::function<std::map<HeadId, double>(std::size_t step)>;

struct GenerateOptions {
    DecodeSpec decode;
    HookSet hooks;                 // static hooks, applied every step
    StepScaleFn step_scale;        // optional, rebuilt each step
    bool keep_step_caches = false; // retain per-step ActivationCache
};

struct GenerateResult {
    TokenSeq tokens;                     // generated continuation only
    std::vector<ProbVector> step_dists;  // distribution before sampling, per step
    std::vector<ActivationCache> step_caches;  // only if keep_step_caches
    bool ood = false;  // window hit before `steps` tokens were produced
};

// Autoregressive generation. Greedy decode is deterministic (argmax, lowest
// index on ties). If prompt+steps exceeds max_seq the result is truncated at
// the window and flagged ood. rng is required for temperature decode.
GenerateResult generate(const ModelWeights& w, const TokenSeq& prompt,
                        std::size_t steps, const GenerateOptions& opts = {},
                        RngStream* rng = nullptr);

// Additive residual-stream contribution of one head at one position:
// head_out(position) * W_O. The head must have been captured.
std::vector<double> head_contribution(const ActivationCache& cache,
                                      const ModelWeights& w, HeadId id,
                                      std::size_t position);

}  // namespace ihlab
