#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ihlab/patching.hpp"

namespace ihlab {

enum class TauMethod { Causal, Norm };

struct ToxicityTrace {
    struct Step {
        std::size_t step = 0;  // 1-based over generated tokens
        std::optional<double> tau;  // absent when the step's contrast degenerated
        double entropy_nats = 0.0;
        std::optional<double> grad_H;  // H_t - H_{t+1}; absent for the last step
        bool toxic_flag = false;       // tau >= gamma
        Token token = 0;               // token generated at this step
    };
    std::vector<Step> steps;
    TauMethod method = TauMethod::Causal;
    double gamma = 0.65;

    std::string to_csv() const;  // step,tau,entropy_nats,grad_H,toxic_flag,method
};

struct ToxicityConfig {
    double gamma = 0.65;
    InductionHeadSet ind_set;

    void validate() const;  // 0 < gamma < 1, non-empty induction set
};

// Share of total absolute causal importance held by the induction set:
// sum_{h in ind} |I_h| / sum_{all h} |I_h|. Throws on all-zero importances.
double toxicity_ratio(const ImportanceMap& importances, const InductionHeadSet& ind_set);

// Per-step causal trace: at each generated step the patching protocol is
// re-run against a per-step corruption (the most recent prior occurrence of
// the context's final token is replaced with a random different token),
// scoring the clean greedy next token. Costs |heads|+2 passes per step.
// Steps whose contrast degenerates (or whose final token has no prior
// occurrence) record tau as missing.
ToxicityTrace toxicity_causal_trace(const ModelWeights& w, const TokenSeq& context,
                                    std::size_t steps, const ToxicityConfig& cfg,
                                    RngStream& rng);

// Cheap norm-based proxy of Eq-4 flavor: ||sum_ind contrib||_2 over
// (||sum_ind contrib||_2 + ||sum_other contrib||_2), contributions being the
// heads' residual-stream vectors at `position`. Requires a capture-all cache.
double toxicity_norm_proxy(const ActivationCache& cache, const ModelWeights& w,
                           const InductionHeadSet& ind_set, std::size_t position);

// Norm-proxy trace over a generation run (one forward per step).
ToxicityTrace toxicity_norm_trace(const ModelWeights& w, const TokenSeq& context,
                                  std::size_t steps, const ToxicityConfig& cfg);

// Entropy series and gradients from the per-step distributions.
struct EntropyTrace {
    std::vector<double> entropy;  // H_t
    std::vector<double> grad;     // H_t - H_{t+1}, length = steps-1
};
EntropyTrace entropy_trace(const std::vector<ProbVector>& step_distributions);

// Least-squares fit of ln H_t = ln H0 - lambda * t over the first `window`
// entries, excluding non-positive values; needs >= 3 usable points.
struct DecayFit {
    double lambda = 0.0;
    double ln_h0 = 0.0;
    std::size_t window = 0;
    double residual = 0.0;  // RMS of ln-space residuals
};
DecayFit fit_decay_rate(std::span<const double> entropy_series, std::size_t window);

// Onset and post-onset persistence of toxicity.
struct PropagationStats {
    std::optional<std::size_t> onset;       // first step index with tau >= gamma
    double fraction_nondecreasing = 0.0;    // post-onset steps with tau_{t+1} >= tau_t
    bool windowed_mean_nondecreasing = false;  // 8-step window means non-decreasing
};
PropagationStats check_propagation(const ToxicityTrace& trace, double gamma);

// Predicted toxicity after descaling: tau / ((1 - tau) * ln(t+c) + tau).
// Throws when t + c <= 1 (outside the contraction regime).
double predicted_descaled_toxicity(double tau, double t, double c);

}  // namespace ihlab
