#include "ihlab/sweep.hpp"

#include <algorithm>
#include <cmath>

#include "ihlab/numerics.hpp"
#include "ihlab/rng.hpp"

namespace ihlab {

void SweepSpec::validate(const ModelConfig& cfg) const {
    if (k_values.empty()) throw std::invalid_argument("SweepSpec: empty k list");
    for (std::size_t k : k_values)
        if (k < 2) throw std::invalid_argument("SweepSpec: k values must be >= 2");
    if (pattern_len < 1 || pattern_len > 4)
        throw std::invalid_argument("SweepSpec: pattern length must be 1-4");
    if (trials == 0) throw std::invalid_argument("SweepSpec: trials must be >= 1");
    for (Token t : token_pool)
        if (t >= cfg.vocab_size)
            throw std::invalid_argument("SweepSpec: pattern token out of vocab");
    policy.validate();
}

std::size_t measure_achieved_repetitions(const TokenSeq& tokens, const TokenSeq& pattern) {
    if (pattern.empty())
        throw std::invalid_argument("measure_achieved_repetitions: empty pattern");
    std::size_t reps = 0;
    std::size_t pos = 0;
    while (pos + pattern.size() <= tokens.size()) {
        bool match = true;
        for (std::size_t i = 0; i < pattern.size(); ++i)
            if (tokens[pos + i] != pattern[i]) { match = false; break; }
        if (!match) break;
        ++reps;
        pos += pattern.size();
    }
    return reps;
}

RepetitionRun run_repetition_cell(const ModelWeights& w, const TokenSeq& pattern,
                                  std::size_t k, std::size_t window,
                                  const InductionHeadSet& ind_set,
                                  const ScalingPolicy& policy) {
    if (pattern.empty()) throw std::invalid_argument("run_repetition_cell: empty pattern");
    policy.validate();
    if (window == 0 || window > w.cfg.max_seq) window = w.cfg.max_seq;

    // Seed with min(k, 8) literal copies of the pattern.
    const std::size_t seeded = std::min<std::size_t>(k, 8);
    TokenSeq ctx;
    for (std::size_t r = 0; r < seeded; ++r)
        ctx.insert(ctx.end(), pattern.begin(), pattern.end());
    if (ctx.size() >= window)
        throw std::invalid_argument("run_repetition_cell: seeded context fills the window");

    const bool identity = policy.kind == ScalingPolicy::Kind::Identity;
    const std::size_t context_len = ctx.size();

    RepetitionRun run;
    double tau_sum = 0.0;
    std::size_t tau_n = 0;
    bool broke = false;

    for (std::size_t t = 1; ctx.size() < window; ++t) {
        HookSet hooks;
        hooks.capture_all = true;
        if (!identity) {
            const double f = scale_factor(policy, t);
            for (const auto& id : ind_set.heads) hooks.scale[id] = f;
        }
        ForwardResult fr = forward(w, ctx, hooks);
        const std::size_t last = ctx.size() - 1;
        Token best = 0;
        double bv = fr.logits.at(last, 0);
        for (std::size_t v = 1; v < w.cfg.vocab_size; ++v)
            if (fr.logits.at(last, v) > bv) { bv = fr.logits.at(last, v); best = static_cast<Token>(v); }

        const ProbVector dist =
            softmax(std::span<const double>(fr.logits.row(last), w.cfg.vocab_size));
        run.final_entropy = entropy(dist);
        if (!ind_set.heads.empty()) {
            try {
                tau_sum += toxicity_norm_proxy(fr.cache, w, ind_set, last);
                ++tau_n;
            } catch (const std::runtime_error&) {
            }
        }

        const Token expected = pattern[ctx.size() % pattern.size()];
        ctx.push_back(best);
        ++run.continuation_length;
        if (best != expected) { broke = true; break; }
    }

    run.ood_flag = !broke;
    if (run.ood_flag) run.continuation_length = window - context_len;
    run.achieved_repetitions = measure_achieved_repetitions(ctx, pattern);
    run.mean_tau = tau_n ? tau_sum / static_cast<double>(tau_n) : 0.0;
    return run;
}

SweepReport run_repetition_sweep(const ModelWeights& w, const SweepSpec& spec,
                                 const InductionHeadSet& ind_set) {
    spec.validate(w.cfg);
    SweepReport report;
    report.spec = spec;

    std::vector<Token> pool = spec.token_pool;
    if (pool.empty()) {
        pool.resize(w.cfg.vocab_size);
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<Token>(i);
    }

    for (std::size_t k : spec.k_values) {
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            RngStream rng = RngStream::derive(
                spec.master_seed, "sweep-k" + std::to_string(k) + "-t" + std::to_string(trial));
            TokenSeq pattern(spec.pattern_len);
            for (auto& t : pattern) t = pool[rng.next_below(pool.size())];

            SweepRow row;
            row.k = k;
            row.pattern = pattern;
            row.policy = spec.policy.to_string();
            row.trial = trial;
            RepetitionRun run = run_repetition_cell(
                w, pattern, k, spec.window ? spec.window : w.cfg.max_seq, ind_set, spec.policy);
            row.achieved_repetitions = run.achieved_repetitions;
            row.continuation_length = run.continuation_length;
            row.ood_flag = run.ood_flag;
            row.mean_tau = run.mean_tau;
            row.final_entropy = run.final_entropy;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

FrequencyBuckets frequency_buckets(const std::vector<TokenSeq>& corpus,
                                   double top_pct, double bottom_pct) {
    if (corpus.empty()) throw std::invalid_argument("frequency_buckets: empty corpus");
    if (!(top_pct > 0.0 && top_pct <= 50.0) || !(bottom_pct > 0.0 && bottom_pct <= 50.0))
        throw std::invalid_argument("frequency_buckets: percentiles must lie in (0, 50]");

    FrequencyBuckets fb;
    for (const auto& seq : corpus)
        for (Token t : seq) ++fb.counts[t];
    if (fb.counts.empty()) throw std::invalid_argument("frequency_buckets: empty corpus");

    std::vector<std::pair<Token, std::size_t>> ranked(fb.counts.begin(), fb.counts.end());
    // Ties broken by token id ascending on both ends.
    auto by_count_desc = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    std::sort(ranked.begin(), ranked.end(), by_count_desc);

    const double n = static_cast<double>(ranked.size());
    const std::size_t n_top = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(top_pct / 100.0 * n)));
    std::size_t n_bottom = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(bottom_pct / 100.0 * n)));
    n_bottom = std::min(n_bottom, ranked.size() - n_top);  // keep sets disjoint

    for (std::size_t i = 0; i < n_top; ++i) fb.top_set.push_back(ranked[i].first);
    for (std::size_t i = 0; i < n_bottom; ++i)
        fb.bottom_set.push_back(ranked[ranked.size() - 1 - i].first);
    std::sort(fb.bottom_set.begin(), fb.bottom_set.end());
    return fb;
}

HeldOutCE held_out_ce(const ModelWeights& w, const ScalingPolicy& policy,
                      const InductionHeadSet& ind_set,
                      const std::vector<TokenSeq>& eval_set) {
    if (eval_set.empty()) throw std::invalid_argument("held_out_ce: empty eval set");
    policy.validate();
    const bool identity = policy.kind == ScalingPolicy::Kind::Identity;

    double ce_sum = 0.0;
    std::size_t n = 0;
    for (const auto& seq : eval_set) {
        if (seq.size() < 2) throw std::invalid_argument("held_out_ce: sequence too short");
        if (identity) {
            ForwardResult fr = forward(w, seq);
            for (std::size_t p = 1; p < seq.size(); ++p) {
                ProbVector dist =
                    softmax(std::span<const double>(fr.logits.row(p - 1), w.cfg.vocab_size));
                ce_sum += -std::log(dist.p[seq[p]]);
                ++n;
            }
        } else {
            // Evaluate each position under the factor generation would have
            // used at that step: one prefix pass per scored position.
            for (std::size_t p = 1; p < seq.size(); ++p) {
                const double f = scale_factor(policy, p);
                HookSet hooks;
                for (const auto& id : ind_set.heads) hooks.scale[id] = f;
                TokenSeq prefix(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(p));
                ForwardResult fr = forward(w, prefix, hooks);
                ProbVector dist =
                    softmax(std::span<const double>(fr.logits.row(p - 1), w.cfg.vocab_size));
                ce_sum += -std::log(dist.p[seq[p]]);
                ++n;
            }
        }
    }
    HeldOutCE out;
    out.cross_entropy_nats = ce_sum / static_cast<double>(n);
    out.perplexity = std::exp(out.cross_entropy_nats);
    return out;
}

}  // namespace ihlab
