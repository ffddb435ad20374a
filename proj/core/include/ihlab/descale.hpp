#pragma once

#include <string>
#include <vector>

#include "ihlab/toxicity.hpp"
#include "ihlab/transformer.hpp"

namespace ihlab {

// Position-dependent scaling of induction-head contributions during
// generation. Factors by kind, for 1-based generation step t:
//   Logarithmic:  1/ln(t+c), clamped to <= 1 when clamp_to_unity
//   Linear:       1/t
//   Constant:     k_const
//   Identity:     1
struct ScalingPolicy {
    enum class Kind { Logarithmic, Linear, Constant, Identity };
    Kind kind = Kind::Identity;
    double c = 2.0;          // logarithmic
    double k_const = 0.5;    // constant
    bool clamp_to_unity = true;

    void validate() const;  // logarithmic: c > 0; constant: k_const > 0

    // CLI spec string: "log:c=2" | "lin" | "const:k=0.5" | "id"; throws
    // std::invalid_argument with usage text on anything else.
    static ScalingPolicy parse(const std::string& spec);
    std::string to_string() const;
};

double scale_factor(const ScalingPolicy& policy, std::size_t t);

struct DescaledGeneration {
    GenerateResult gen;
    std::vector<double> factors;  // per-step scale factor actually applied
    ToxicityTrace trace;          // norm-proxy trace over the run
};

// generate() with scale hooks installed on exactly the heads in ind_set,
// the factor recomputed each step. Identity policy is bitwise-neutral.
DescaledGeneration descaled_generate(const ModelWeights& w, const TokenSeq& prompt,
                                     std::size_t steps, const InductionHeadSet& ind_set,
                                     const ScalingPolicy& policy,
                                     const DecodeSpec& decode = {},
                                     RngStream* rng = nullptr, double gamma = 0.65);

struct CAblationRow {
    double c = 0.0;
    double median_achieved = 0.0;      // achieved repetitions at the probe k
    double ood_fraction = 0.0;
    double held_out_ce = 0.0;
};

struct CAblationSetup {
    std::size_t probe_k = 64;     // seeded repetition target
    std::size_t pattern_len = 2;
    std::size_t trials = 5;
    std::size_t window = 0;       // 0 = model max_seq
    std::uint64_t seed = 0;
    std::vector<TokenSeq> eval_set;  // held-out sequences for CE
};

// Grid over c for the logarithmic policy. Non-positive c values are rejected
// up front (the scaling function is invalid there).
std::vector<CAblationRow> ablate_c(const ModelWeights& w, const InductionHeadSet& ind_set,
                                   const std::vector<double>& c_values,
                                   const CAblationSetup& setup);

}  // namespace ihlab
