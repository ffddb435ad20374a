#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ihlab/descale.hpp"
#include "ihlab/model.hpp"
#include "ihlab/patching.hpp"

namespace ihlab {

// Desk-scale repetition-curse sweep: seed the context with k copies of a
// short pattern (capped at 8 copies for k >= 8, the stimulus analogue of
// prefilling) and let the model run until it breaks the pattern or hits the
// window.
struct SweepSpec {
    std::vector<std::size_t> k_values = {2, 4, 8, 16, 32, 64, 128, 256, 512};
    std::size_t pattern_len = 2;          // 1-4 tokens
    std::vector<Token> token_pool;        // empty = full vocabulary
    std::size_t window = 0;               // 0 = model max_seq
    ScalingPolicy policy;
    std::size_t trials = 3;
    std::uint64_t master_seed = 0;

    void validate(const ModelConfig& cfg) const;
};

struct SweepRow {
    std::size_t k = 0;
    TokenSeq pattern;
    std::string policy;
    std::size_t trial = 0;
    std::size_t achieved_repetitions = 0;
    std::size_t continuation_length = 0;
    bool ood_flag = false;
    double mean_tau = 0.0;      // norm-proxy mean over generated steps
    double final_entropy = 0.0;
};

struct SweepReport {
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

// Number of consecutive copies of `pattern` starting at position 0.
std::size_t measure_achieved_repetitions(const TokenSeq& tokens, const TokenSeq& pattern);

struct RepetitionRun {
    std::size_t achieved_repetitions = 0;
    std::size_t continuation_length = 0;
    bool ood_flag = false;
    double mean_tau = 0.0;
    double final_entropy = 0.0;
};

// One sweep cell: greedy generation from the seeded context until the
// pattern breaks or the window is hit (-> ood). Scale hooks per `policy`
// on `ind_set`; pass an empty set with the identity policy for a plain
// baseline.
RepetitionRun run_repetition_cell(const ModelWeights& w, const TokenSeq& pattern,
                                  std::size_t k, std::size_t window,
                                  const InductionHeadSet& ind_set,
                                  const ScalingPolicy& policy);

SweepReport run_repetition_sweep(const ModelWeights& w, const SweepSpec& spec,
                                 const InductionHeadSet& ind_set);

// Unigram counts over a toy corpus plus top/bottom percentile buckets
// (deterministic ties by token id; buckets always disjoint).
struct FrequencyBuckets {
    std::map<Token, std::size_t> counts;
    std::vector<Token> top_set;
    std::vector<Token> bottom_set;
};
FrequencyBuckets frequency_buckets(const std::vector<TokenSeq>& corpus,
                                   double top_pct, double bottom_pct);

struct HeldOutCE {
    double cross_entropy_nats = 0.0;
    double perplexity = 1.0;
};

// Teacher-forced mean next-token cross-entropy with scale hooks active. The
// scaling step index is the 1-based position within the scored region, so
// position p is evaluated exactly as generation would have seen it (one
// prefix pass per position for non-identity policies).
HeldOutCE held_out_ce(const ModelWeights& w, const ScalingPolicy& policy,
                      const InductionHeadSet& ind_set,
                      const std::vector<TokenSeq>& eval_set);

}  // namespace ihlab
