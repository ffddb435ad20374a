#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihlab/copy_task.hpp"
#include "ihlab/model.hpp"
#include "ihlab/rng.hpp"
#include "ihlab/transformer.hpp"

namespace ihlab {

// Raised when |l_clean - l_corrupt| < 1e-9 and the logit-recovery ratio is
// undefined; callers discard the trial.
struct DegenerateContrast : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kContrastEps = 1e-9;

// Logit recovery: (l_patched - l_corrupt) / (l_clean - l_corrupt).
// Inputs are the target-token logits at the final position of the clean,
// corrupted and patched passes.
double causal_importance(double l_clean, double l_corrupt, double l_patched);

struct ImportanceMap {
    struct Entry {
        double importance = 0.0;  // mean over non-degenerate trials (signed)
        std::size_t n_trials = 0;
        std::vector<double> raw;  // per-trial values, kept when requested
    };
    std::map<HeadId, Entry> heads;

    double importance_of(HeadId id) const { return heads.at(id).importance; }
    std::string to_csv() const;  // columns: layer,head,importance,n_trials
};

struct InductionHeadSet {
    std::vector<HeadId> heads;  // importance descending, ties by (layer, head)
    double selection_p = 0.0;
    std::string source_digest;

    bool contains(HeadId id) const;
    std::string to_json() const;  // [[layer, head], ...]
};

// Three-stage protocol over a batch of copy-task instances: clean pass
// (capture all heads), corrupted pass, then one patched pass per head with
// that head's clean outputs substituted at all positions. |heads|+2 passes
// per trial. Per-head importance = mean of Eq-style per-trial ratios over
// non-degenerate trials.
ImportanceMap run_patch_protocol(const ModelWeights& w,
                                 const std::vector<CopyTaskInstance>& instances,
                                 RngStream& rng, bool keep_raw = false);

// Top max(1, ceil(p/100 * total)) heads by importance.
InductionHeadSet identify_induction_heads(const ImportanceMap& map, double p);

// Behavioral scores on a pattern sequence [A][B]...[A]: p_match is the
// head's attention from the final A back to the first A's match site (the
// slot right after it, holding B); copy_boost is the
// logit delta on B at the final position between the head active and the
// head zero-scaled.
struct PatternSeq {
    TokenSeq tokens;
    std::size_t first_pos;   // first occurrence of the repeated token A
    std::size_t second_pos;  // later occurrence of A (query position)
    Token successor;         // B, the token following the first A
};

// Builds [A][B] followed by distinct fillers and a trailing [A].
PatternSeq make_pattern_seq(std::size_t vocab_size, std::size_t len, RngStream& rng);

double prefix_match_score(const ModelWeights& w, const PatternSeq& seq, HeadId head);
double copy_boost_score(const ModelWeights& w, const PatternSeq& seq, HeadId head);

}  // namespace ihlab
