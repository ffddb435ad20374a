#include "ihlab/descale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ihlab/sweep.hpp"

namespace ihlab {

void ScalingPolicy::validate() const {
    if (kind == Kind::Logarithmic && !(c > 0.0))
        throw std::invalid_argument("ScalingPolicy: logarithmic requires c > 0");
    if (kind == Kind::Constant && !(k_const > 0.0))
        throw std::invalid_argument("ScalingPolicy: constant requires k_const > 0");
}

ScalingPolicy ScalingPolicy::parse(const std::string& spec) {
    static const char* usage =
        "invalid policy spec (expected: log:c=<float> | lin | const:k=<float> | id)";
    ScalingPolicy p;
    if (spec == "id") {
        p.kind = Kind::Identity;
    } else if (spec == "lin") {
        p.kind = Kind::Linear;
    } else if (spec.rfind("log:c=", 0) == 0) {
        p.kind = Kind::Logarithmic;
        char* end = nullptr;
        p.c = std::strtod(spec.c_str() + 6, &end);
        if (end == spec.c_str() + 6 || *end != '\0') throw std::invalid_argument(usage);
    } else if (spec.rfind("const:k=", 0) == 0) {
        p.kind = Kind::Constant;
        char* end = nullptr;
        p.k_const = std::strtod(spec.c_str() + 8, &end);
        if (end == spec.c_str() + 8 || *end != '\0') throw std::invalid_argument(usage);
    } else {
        throw std::invalid_argument(usage);
    }
    p.validate();
    return p;
}

std::string ScalingPolicy::to_string() const {
    char buf[48];
    switch (kind) {
        case Kind::Identity: return "id";
        case Kind::Linear: return "lin";
        case Kind::Logarithmic:
            std::snprintf(buf, sizeof(buf), "log:c=%g", c);
            return buf;
        case Kind::Constant:
            std::snprintf(buf, sizeof(buf), "const:k=%g", k_const);
            return buf;
    }
    return "id";
}

double scale_factor(const ScalingPolicy& policy, std::size_t t) {
    if (t == 0) throw std::invalid_argument("scale_factor: t >= 1 required");
    policy.validate();
    switch (policy.kind) {
        case ScalingPolicy::Kind::Identity:
            return 1.0;
        case ScalingPolicy::Kind::Linear:
            return 1.0 / static_cast<double>(t);
        case ScalingPolicy::Kind::Constant:
            return policy.k_const;
        case ScalingPolicy::Kind::Logarithmic: {
            const double arg = static_cast<double>(t) + policy.c;
            if (arg <= 1.0)
                throw std::invalid_argument("scale_factor: t + c <= 1 (ln <= 0)");
            const double f = 1.0 / std::log(arg);
            return policy.clamp_to_unity ? std::min(1.0, f) : f;
        }
    }
    return 1.0;
}

DescaledGeneration descaled_generate(const ModelWeights& w, const TokenSeq& prompt,
                                     std::size_t steps, const InductionHeadSet& ind_set,
                                     const ScalingPolicy& policy,
                                     const DecodeSpec& decode, RngStream* rng,
                                     double gamma) {
    policy.validate();
    const bool identity = policy.kind == ScalingPolicy::Kind::Identity;
    if (ind_set.heads.empty() && !identity)
        throw std::invalid_argument("descaled_generate: empty induction set");

    DescaledGeneration out;
    GenerateOptions opts;
    opts.decode = decode;
    opts.hooks.capture_all = true;
    opts.keep_step_caches = true;
    if (!identity) {
        opts.step_scale = [&](std::size_t t) {
            const double f = scale_factor(policy, t);
            std::map<HeadId, double> m;
            for (const auto& id : ind_set.heads) m[id] = f;
            return m;
        };
    }
    out.gen = generate(w, prompt, steps, opts, rng);

    for (std::size_t t = 1; t <= out.gen.tokens.size(); ++t)
        out.factors.push_back(identity ? 1.0 : scale_factor(policy, t));

    // Norm-proxy toxicity trace over the run, from the kept caches.
    out.trace.method = TauMethod::Norm;
    out.trace.gamma = gamma;
    std::size_t pos = prompt.size() - 1;
    for (std::size_t i = 0; i < out.gen.tokens.size(); ++i, ++pos) {
        ToxicityTrace::Step rec;
        rec.step = i + 1;
        rec.entropy_nats = entropy(out.gen.step_dists[i]);
        rec.token = out.gen.tokens[i];
        if (!ind_set.heads.empty()) {
            try {
                rec.tau = toxicity_norm_proxy(out.gen.step_caches[i], w, ind_set, pos);
                rec.toxic_flag = *rec.tau >= gamma;
            } catch (const std::runtime_error&) {
            }
        }
        out.trace.steps.push_back(rec);
    }
    for (std::size_t i = 0; i + 1 < out.trace.steps.size(); ++i)
        out.trace.steps[i].grad_H =
            out.trace.steps[i].entropy_nats - out.trace.steps[i + 1].entropy_nats;
    out.gen.step_caches.clear();
    return out;
}

std::vector<CAblationRow> ablate_c(const ModelWeights& w, const InductionHeadSet& ind_set,
                                   const std::vector<double>& c_values,
                                   const CAblationSetup& setup) {
    for (double c : c_values)
        if (!(c > 0.0))
            throw std::invalid_argument(
                "ablate_c: non-positive c renders the scaling function invalid (c = " +
                std::to_string(c) + ")");

    std::vector<CAblationRow> rows;
    for (double c : c_values) {
        ScalingPolicy policy;
        policy.kind = ScalingPolicy::Kind::Logarithmic;
        policy.c = c;

        RngStream rng = RngStream::derive(setup.seed, "ablate-c");
        std::vector<double> achieved;
        std::size_t ood = 0;
        for (std::size_t trial = 0; trial < setup.trials; ++trial) {
            RngStream trial_rng = rng.child("trial-" + std::to_string(trial));
            TokenSeq pattern(setup.pattern_len);
            for (auto& t : pattern)
                t = static_cast<Token>(trial_rng.next_below(w.cfg.vocab_size));
            RepetitionRun run = run_repetition_cell(w, pattern, setup.probe_k,
                                                    setup.window ? setup.window : w.cfg.max_seq,
                                                    ind_set, policy);
            achieved.push_back(static_cast<double>(run.achieved_repetitions));
            if (run.ood_flag) ++ood;
        }
        std::sort(achieved.begin(), achieved.end());

        CAblationRow row;
        row.c = c;
        row.median_achieved = achieved[achieved.size() / 2];
        row.ood_fraction = static_cast<double>(ood) / static_cast<double>(setup.trials);
        row.held_out_ce = setup.eval_set.empty()
            ? 0.0
            : held_out_ce(w, policy, ind_set, setup.eval_set).cross_entropy_nats;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ihlab
