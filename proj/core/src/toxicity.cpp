#include "ihlab/toxicity.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ihlab/numerics.hpp"

namespace ihlab {

void ToxicityConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("ToxicityConfig: need 0 < gamma < 1");
    if (ind_set.heads.empty())
        throw std::invalid_argument("ToxicityConfig: empty induction-head set");
}

std::string ToxicityTrace::to_csv() const {
    std::ostringstream out;
    out << "step,tau,entropy_nats,grad_H,toxic_flag,method\n";
    const char* m = method == TauMethod::Causal ? "causal" : "norm";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& s : steps) {
        out << s.step << ',';
        if (s.tau) out << fmt(*s.tau);
        out << ',' << fmt(s.entropy_nats) << ',';
        if (s.grad_H) out << fmt(*s.grad_H);
        out << ',' << (s.toxic_flag ? 1 : 0) << ',' << m << '\n';
    }
    return out.str();
}

double toxicity_ratio(const ImportanceMap& importances, const InductionHeadSet& ind_set) {
    double total = 0.0, ind = 0.0;
    for (const auto& [id, e] : importances.heads) {
        const double a = std::abs(e.importance);
        total += a;
        if (ind_set.contains(id)) ind += a;
    }
    if (total == 0.0)
        throw std::runtime_error("toxicity_ratio: all-zero importances, ratio undefined");
    return ind / total;
}

namespace {

Token greedy_token(const Matrix& logits, std::size_t row, std::size_t vocab) {
    Token best = 0;
    double bv = logits.at(row, 0);
    for (std::size_t v = 1; v < vocab; ++v)
        if (logits.at(row, v) > bv) { bv = logits.at(row, v); best = static_cast<Token>(v); }
    return best;
}

// All occurrences of `tok` strictly before the final position.
std::vector<std::size_t> prior_occurrences(const TokenSeq& ctx, Token tok) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i + 1 < ctx.size(); ++i)
        if (ctx[i] == tok) out.push_back(i);
    return out;
}

void finish_trace(ToxicityTrace& trace) {
    for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i)
        trace.steps[i].grad_H = trace.steps[i].entropy_nats - trace.steps[i + 1].entropy_nats;
}

}  // namespace

ToxicityTrace toxicity_causal_trace(const ModelWeights& w, const TokenSeq& context,
                                    std::size_t steps, const ToxicityConfig& cfg,
                                    RngStream& rng) {
    cfg.validate();
    if (context.empty()) throw std::invalid_argument("toxicity_causal_trace: empty context");
    if (context.size() + steps > w.cfg.max_seq)
        throw std::invalid_argument("toxicity_causal_trace: window overflow");

    ToxicityTrace trace;
    trace.method = TauMethod::Causal;
    trace.gamma = cfg.gamma;

    TokenSeq ctx = context;
    for (std::size_t t = 1; t <= steps; ++t) {
        HookSet capture;
        capture.capture_all = true;
        ForwardResult clean = forward(w, ctx, capture);
        const std::size_t last = ctx.size() - 1;
        const ProbVector dist =
            softmax(std::span<const double>(clean.logits.row(last), w.cfg.vocab_size));
        const Token next = greedy_token(clean.logits, last, w.cfg.vocab_size);

        ToxicityTrace::Step rec;
        rec.step = t;
        rec.entropy_nats = entropy(dist);
        rec.token = next;

        // Per-step corruption: rewrite the successor of every prior occurrence
        // of the context's final token, i.e. the content an induction head
        // would copy. Rewriting the match sites themselves is recoverable
        // through the previous-token head (patching its clean output restores
        // the keys), which misattributes the recovery; rewriting only one
        // successor leaves other copies intact in repetitive contexts and the
        // contrast degenerates.
        std::vector<std::size_t> sites;
        for (std::size_t pos : prior_occurrences(ctx, ctx.back()))
            if (pos + 1 < last) sites.push_back(pos + 1);
        if (!sites.empty()) {
            TokenSeq corrupted = ctx;
            for (std::size_t pos : sites) {
                Token repl = static_cast<Token>(rng.next_below(w.cfg.vocab_size - 1));
                if (repl >= ctx[pos]) ++repl;
                corrupted[pos] = repl;
            }

            ForwardResult corr = forward(w, corrupted);
            const double l_clean = clean.logits.at(last, next);
            const double l_corrupt = corr.logits.at(last, next);
            if (std::abs(l_clean - l_corrupt) >= kContrastEps) {
                ImportanceMap map;
                for (std::size_t l = 0; l < w.cfg.n_layers; ++l) {
                    for (std::size_t h = 0; h < w.cfg.n_heads; ++h) {
                        const HeadId id{l, h};
                        HookSet patch;
                        patch.patch[id] = clean.cache.heads.at(id).head_out;
                        ForwardResult patched = forward(w, corrupted, patch);
                        const double l_patched = patched.logits.at(last, next);
                        ImportanceMap::Entry e;
                        e.importance = causal_importance(l_clean, l_corrupt, l_patched);
                        e.n_trials = 1;
                        map.heads[id] = e;
                    }
                }
                bool all_zero = true;
                for (const auto& [id, e] : map.heads)
                    if (e.importance != 0.0) { all_zero = false; break; }
                if (!all_zero) {
                    rec.tau = toxicity_ratio(map, cfg.ind_set);
                    rec.toxic_flag = *rec.tau >= cfg.gamma;
                }
            }
        }

        trace.steps.push_back(rec);
        ctx.push_back(next);
    }
    finish_trace(trace);
    return trace;
}

double toxicity_norm_proxy(const ActivationCache& cache, const ModelWeights& w,
                           const InductionHeadSet& ind_set, std::size_t position) {
    std::vector<double> ind_sum(w.cfg.d_model, 0.0), other_sum(w.cfg.d_model, 0.0);
    for (std::size_t l = 0; l < w.cfg.n_layers; ++l) {
        for (std::size_t h = 0; h < w.cfg.n_heads; ++h) {
            const HeadId id{l, h};
            std::vector<double> c = head_contribution(cache, w, id, position);
            auto& dst = ind_set.contains(id) ? ind_sum : other_sum;
            for (std::size_t d = 0; d < c.size(); ++d) dst[d] += c[d];
        }
    }
    const double ni = l2_norm(ind_sum), no = l2_norm(other_sum);
    if (ni + no == 0.0)
        throw std::runtime_error("toxicity_norm_proxy: zero contributions, ratio undefined");
    return ni / (ni + no);
}

ToxicityTrace toxicity_norm_trace(const ModelWeights& w, const TokenSeq& context,
                                  std::size_t steps, const ToxicityConfig& cfg) {
    cfg.validate();
    if (context.empty()) throw std::invalid_argument("toxicity_norm_trace: empty context");
    if (context.size() + steps > w.cfg.max_seq)
        throw std::invalid_argument("toxicity_norm_trace: window overflow");

    ToxicityTrace trace;
    trace.method = TauMethod::Norm;
    trace.gamma = cfg.gamma;

    TokenSeq ctx = context;
    for (std::size_t t = 1; t <= steps; ++t) {
        HookSet capture;
        capture.capture_all = true;
        ForwardResult fr = forward(w, ctx, capture);
        const std::size_t last = ctx.size() - 1;
        const ProbVector dist =
            softmax(std::span<const double>(fr.logits.row(last), w.cfg.vocab_size));
        const Token next = greedy_token(fr.logits, last, w.cfg.vocab_size);

        ToxicityTrace::Step rec;
        rec.step = t;
        rec.entropy_nats = entropy(dist);
        rec.token = next;
        try {
            rec.tau = toxicity_norm_proxy(fr.cache, w, cfg.ind_set, last);
            rec.toxic_flag = *rec.tau >= cfg.gamma;
        } catch (const std::runtime_error&) {
            // zero contributions: tau missing
        }
        trace.steps.push_back(rec);
        ctx.push_back(next);
    }
    finish_trace(trace);
    return trace;
}

EntropyTrace entropy_trace(const std::vector<ProbVector>& step_distributions) {
    if (step_distributions.size() < 2)
        throw std::invalid_argument("entropy_trace: need >= 2 steps");
    EntropyTrace out;
    for (const auto& p : step_distributions) out.entropy.push_back(entropy(p));
    for (std::size_t i = 0; i + 1 < out.entropy.size(); ++i)
        out.grad.push_back(out.entropy[i] - out.entropy[i + 1]);
    return out;
}

DecayFit fit_decay_rate(std::span<const double> entropy_series, std::size_t window) {
    if (window < 3) throw std::invalid_argument("fit_decay_rate: window >= 3 required");
    window = std::min(window, entropy_series.size());

    std::vector<std::pair<double, double>> pts;  // (t, ln H_t)
    for (std::size_t t = 0; t < window; ++t)
        if (entropy_series[t] > 0.0)
            pts.emplace_back(static_cast<double>(t), std::log(entropy_series[t]));
    if (pts.size() < 3)
        throw std::invalid_argument("fit_decay_rate: fewer than 3 positive entropies in window");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) { sx += x; sy += y; sxx += x * x; sxy += x * y; }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;

    DecayFit fit;
    fit.lambda = -slope;
    fit.ln_h0 = intercept;
    fit.window = window;
    double ss = 0.0;
    for (auto [x, y] : pts) {
        const double r = y - (intercept + slope * x);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

PropagationStats check_propagation(const ToxicityTrace& trace, double gamma) {
    if (trace.steps.size() < 2)
        throw std::invalid_argument("check_propagation: trace length >= 2 required");
    PropagationStats stats;

    std::vector<double> taus;
    std::size_t onset_idx = 0;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        if (!stats.onset && s.tau && *s.tau >= gamma) {
            stats.onset = s.step;
            onset_idx = i;
        }
    }
    if (!stats.onset) return stats;

    for (std::size_t i = onset_idx; i < trace.steps.size(); ++i)
        if (trace.steps[i].tau) taus.push_back(*trace.steps[i].tau);

    if (taus.size() >= 2) {
        std::size_t nondec = 0;
        for (std::size_t i = 0; i + 1 < taus.size(); ++i)
            if (taus[i + 1] >= taus[i]) ++nondec;
        stats.fraction_nondecreasing =
            static_cast<double>(nondec) / static_cast<double>(taus.size() - 1);
    } else {
        stats.fraction_nondecreasing = 1.0;
    }

    // Means over consecutive complete 8-step windows must be non-decreasing.
    // A trailing partial window is not an 8-step window and is ignored.
    constexpr std::size_t kWindow = 8;
    std::vector<double> means;
    for (std::size_t start = 0; start + kWindow <= taus.size(); start += kWindow) {
        double sum = 0.0;
        for (std::size_t i = start; i < start + kWindow; ++i) sum += taus[i];
        means.push_back(sum / static_cast<double>(kWindow));
    }
    // Non-decreasing up to the sampling noise of an 8-sample mean: per-step
    // tau jitters by ~0.14 on trained toy models, so one standard error of the
    // window mean is ~0.05. Without this allowance the flag is a coin toss on
    // a saturated (plateaued) trace.
    constexpr double kMeanNoise = 0.05;
    stats.windowed_mean_nondecreasing = true;
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
        if (means[i + 1] < means[i] - kMeanNoise) {
            stats.windowed_mean_nondecreasing = false;
            break;
        }
    return stats;
}

double predicted_descaled_toxicity(double tau, double t, double c) {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw std::invalid_argument("predicted_descaled_toxicity: tau outside [0,1]");
    if (t + c <= 1.0)
        throw std::invalid_argument("predicted_descaled_toxicity: t + c <= 1 (ln <= 0)");
    const double lg = std::log(t + c);
    return tau / ((1.0 - tau) * lg + tau);
}

}  // namespace ihlab
