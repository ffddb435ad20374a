// End-to-end acceptance gate: one pass/fail line per criterion, exit code =
// number of failed criteria. Criteria 5-8 share one trained model built from
// the pinned config in configs/train_emergence.json.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ihlab/checkpoint.hpp"
#include "ihlab/copy_task.hpp"
#include "ihlab/descale.hpp"
#include "ihlab/numerics.hpp"
#include "ihlab/patching.hpp"
#include "ihlab/report.hpp"
#include "ihlab/rng.hpp"
#include "ihlab/sweep.hpp"
#include "ihlab/toxicity.hpp"
#include "ihlab/training.hpp"
#include "ihlab/transformer.hpp"
#include "ihlab/wiring.hpp"
#include "json.hpp"

using namespace ihlab;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail) {
    std::printf("criterion %2d [%s] %s — %s\n", n, ok ? "PASS" : "FAIL", what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

std::string test_data_dir() {
    const char* d = std::getenv("IHLAB_TEST_DATA");
    return d ? d : "tests";
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CopyTaskInstance> copy_instances(std::size_t vocab, std::size_t n,
                                             std::uint64_t seed, const char* label) {
    RngStream rng = RngStream::derive(seed, label);
    std::vector<CopyTaskInstance> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_copy_instance(vocab, 8, rng));
    return out;
}

// ---------------------------------------------------------------- criterion 1
void criterion1() {
    ModelConfig cfg = wired_config(16, 24);
    ModelWeights w = wire_induction_model(cfg, 30.0);
    auto instances = copy_instances(cfg.vocab_size, 100, 101, "c1-instances");
    RngStream rng = RngStream::derive(101, "c1-patch");
    ImportanceMap m = run_patch_protocol(w, instances, rng);
    InductionHeadSet top = identify_induction_heads(m, 2.0);
    const double best = m.importance_of(wired::kInductionHead);
    bool zeros_ok = true;
    double worst_zero = 0.0;
    for (const auto& [id, e] : m.heads) {
        if (id == wired::kInductionHead || id == wired::kPrevTokenHead) continue;
        worst_zero = std::max(worst_zero, std::fabs(e.importance));
        if (std::fabs(e.importance) >= 1e-6) zeros_ok = false;
    }
    const bool ok = top.heads.size() == 1 && top.heads[0] == wired::kInductionHead &&
                    best > 0.9 && zeros_ok;
    report(1, "wired-oracle detection", ok,
           fmt("designated head importance %.4f (need > 0.9), rank-1 %s, max |I| over "
               "zero-output heads %.2e (need < 1e-6)",
               best, top.heads[0] == wired::kInductionHead ? "yes" : "no", worst_zero));
}

// ---------------------------------------------------------------- criterion 2
void criterion2() {
    RngStream rng = RngStream::derive(202, "c2");
    double max_dev = 0.0;
    std::size_t bad_shift = 0, missed_throws = 0;
    for (int i = 0; i < 100000; ++i) {
        const double lc = rng.next_gaussian() * 5.0;
        const double lk = lc + (rng.next_double() < 0.5 ? -1.0 : 1.0) *
                                   (1e-4 + rng.next_double() * 10.0);
        const double lp = rng.next_gaussian() * 5.0;
        const double base = causal_importance(lk, lc, lp);
        const double b = rng.next_gaussian() * 10.0;
        const double shifted = causal_importance(lk + b, lc + b, lp + b);
        const double dev = std::fabs(shifted - base) / std::max(1.0, std::fabs(base));
        max_dev = std::max(max_dev, dev);
        if (dev > 1e-9) ++bad_shift;
        // Degenerate contrast must throw.
        const double tiny = rng.next_double() * 0.99e-9;
        try {
            causal_importance(lc + tiny, lc, lp);
            ++missed_throws;
        } catch (const DegenerateContrast&) {
        }
    }
    const bool ok = bad_shift == 0 && missed_throws == 0;
    report(2, "logit-recovery ratio: shift invariance + degenerate handling", ok,
           fmt("10^5 triples, max relative shift deviation %.3e (tol 1e-9), degenerate "
               "throws missed %zu",
               max_dev, missed_throws));
}

// ---------------------------------------------------------------- criterion 3
void criterion3() {
    RngStream rng = RngStream::derive(303, "c3");
    std::size_t viol = 0, eq_viol = 0;
    for (int i = 0; i < 100000; ++i) {
        const double tau = rng.next_double();
        const double lntc = 1.0 + rng.next_double() * 6.0;  // ln(t+c) >= 1
        const double c = 2.0;
        const double t = std::exp(lntc) - c;
        const double tilde = predicted_descaled_toxicity(tau, t, c);
        if (tilde > tau + 1e-12) ++viol;
        // Strict contraction away from the fixed points.
        if (tau > 1e-6 && tau < 1.0 - 1e-6 && lntc > 1.0 + 1e-6 && tilde >= tau) ++eq_viol;
    }
    const double hand = predicted_descaled_toxicity(0.8, std::exp(2.0) - 2.0, 2.0);
    const bool fixed = std::fabs(predicted_descaled_toxicity(0.0, 10.0, 2.0)) < 1e-15 &&
                       std::fabs(predicted_descaled_toxicity(1.0, 10.0, 2.0) - 1.0) < 1e-15 &&
                       std::fabs(predicted_descaled_toxicity(0.37, std::exp(1.0) - 2.0, 2.0) -
                                 0.37) < 1e-12;
    const bool ok = viol == 0 && eq_viol == 0 && std::fabs(hand - 2.0 / 3.0) < 1e-12 && fixed;
    report(3, "descaled-toxicity contraction property", ok,
           fmt("10^5 samples: %zu contraction violations, %zu strictness violations, "
               "hand value |err| %.2e, fixed points %s",
               viol, eq_viol, std::fabs(hand - 2.0 / 3.0), fixed ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ModelConfig cfg{2, 2, 8, 4, 8, 12};
        TrainSpec ts;
        ts.seed = 1000 + seed;
        ts.init_std = 0.3;
        ModelWeights w = init_weights(cfg, ts);
        RngStream rng = RngStream::derive(seed, "c4-batch");
        std::vector<TokenSeq> batch;
        for (int b = 0; b < 2; ++b) {
            TokenSeq s;
            for (int t = 0; t < 6; ++t)
                s.push_back(static_cast<Token>(rng.next_below(cfg.vocab_size)));
            batch.push_back(s);
        }
        LossAndGrad lg = loss_and_grad(w, batch);
        std::vector<Matrix*> ms = {&w.token_embed, &w.pos_embed, &w.unembed};
        std::vector<const Matrix*> gs = {&lg.grad.token_embed, &lg.grad.pos_embed,
                                         &lg.grad.unembed};
        for (std::size_t l = 0; l < cfg.n_layers; ++l)
            for (std::size_t h = 0; h < cfg.n_heads; ++h) {
                HeadWeights& hw = w.heads[l][h];
                const HeadWeights& gw = lg.grad.heads[l][h];
                for (auto [mp, gp] : {std::pair{&hw.w_q, &gw.w_q}, {&hw.w_k, &gw.w_k},
                                      {&hw.w_v, &gw.w_v}, {&hw.w_o, &gw.w_o}}) {
                    ms.push_back(mp);
                    gs.push_back(gp);
                }
            }
        const double h = 1e-5;
        for (std::size_t m = 0; m < ms.size(); ++m) {
            for (std::size_t i = 0; i < ms[m]->data.size(); ++i) {
                const double orig = ms[m]->data[i];
                ms[m]->data[i] = orig + h;
                const double lp = loss_and_grad(w, batch).loss;
                ms[m]->data[i] = orig - h;
                const double lm = loss_and_grad(w, batch).loss;
                ms[m]->data[i] = orig;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = gs[m]->data[i];
                const double rel =
                    std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-6});
                worst = std::max(worst, rel);
            }
        }
    }
    report(4, "gradients vs central finite differences (20 seeds, all coordinates)",
           worst < 1e-4, fmt("max relative error %.3e (need < 1e-4)", worst));
}

// ---------------------------------------------------- shared trained organism
struct Organism {
    ModelConfig cfg;
    ModelWeights weights;
    TrainSpec spec;
    InductionHeadSet ind_set;
    ImportanceMap importance;
    double train_seconds = 0.0;
};

Organism train_organism() {
    const std::string cfg_path = test_data_dir() + "/../configs/train_emergence.json";
    std::ifstream in(cfg_path);
    if (!in.good()) throw std::runtime_error("missing pinned config: " + cfg_path);
    ordered_json j = ordered_json::parse(in);

    Organism org;
    org.cfg.n_layers = j["model"]["n_layers"].get<std::size_t>();
    org.cfg.n_heads = j["model"]["n_heads"].get<std::size_t>();
    org.cfg.d_model = j["model"]["d_model"].get<std::size_t>();
    org.cfg.d_head = j["model"]["d_head"].get<std::size_t>();
    org.cfg.vocab_size = j["model"]["vocab_size"].get<std::size_t>();
    org.cfg.max_seq = j["model"]["max_seq"].get<std::size_t>();
    TrainSpec& s = org.spec;
    s.seq_len = j["train"]["seq_len"].get<std::size_t>();
    s.seg_min = j["train"]["seg_min"].get<std::size_t>();
    s.seg_max = j["train"]["seg_max"].get<std::size_t>();
    s.rep_min = j["train"]["rep_min"].get<std::size_t>();
    s.rep_max = j["train"]["rep_max"].get<std::size_t>();
    s.batch_size = j["train"]["batch_size"].get<std::size_t>();
    s.steps = j["train"]["steps"].get<std::size_t>();
    s.learning_rate = j["train"]["learning_rate"].get<double>();
    s.warmup_steps = j["train"]["warmup_steps"].get<std::size_t>();
    s.init_std = j["train"]["init_std"].get<double>();
    s.seed = j["train"]["seed"].get<std::uint64_t>();

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult res = train_toy_model(org.cfg, org.spec);
    org.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    org.weights = std::move(res.weights);

    auto instances = copy_instances(org.cfg.vocab_size, 100, 505, "organism-detect");
    RngStream rng = RngStream::derive(505, "organism-patch");
    org.importance = run_patch_protocol(org.weights, instances, rng);
    org.ind_set = identify_induction_heads(org.importance, 2.0);
    return org;
}

// ---------------------------------------------------------------- criterion 5
void criterion5(const Organism& org) {
    HeadId best{0, 0};
    double best_imp = -1e9;
    for (const auto& [id, e] : org.importance.heads)
        if (e.importance > best_imp) { best_imp = e.importance; best = id; }

    RngStream rng = RngStream::derive(506, "c5-patterns");
    std::vector<PatternSeq> seqs;
    for (int i = 0; i < 20; ++i) seqs.push_back(make_pattern_seq(org.cfg.vocab_size, 12, rng));
    std::vector<double> pmatches;
    double best_pm = 0.0;
    for (const auto& [id, e] : org.importance.heads) {
        double pm = 0.0;
        for (const auto& s : seqs) pm += prefix_match_score(org.weights, s, id);
        pm /= static_cast<double>(seqs.size());
        pmatches.push_back(pm);
        if (id == best) best_pm = pm;
    }
    const double med = median(pmatches);
    const bool ok = best_imp > 0.5 && best_pm > med && org.train_seconds < 1800.0;
    report(5, "emergence: trained model grows a detectable induction head", ok,
           fmt("head (%zu,%zu) importance %.3f (need > 0.5), p_match %.3f vs median %.3f, "
               "training %.0fs (cap 1800s)",
               best.layer, best.head, best_imp, best_pm, med, org.train_seconds));
}

// ---------------------------------------------------------------- criterion 6
void criterion6(const Organism& org) {
    ToxicityConfig tox;
    tox.ind_set = org.ind_set;
    const std::size_t ctx_copies = 8, pat_len = 2;
    const std::size_t steps =
        std::min<std::size_t>(64, org.cfg.max_seq - ctx_copies * pat_len - 1);

    std::size_t reached = 0, decay_ok = 0, prop_ok = 0, toxic_runs = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        RngStream rng = RngStream::derive(600 + s, "c6");
        const Token a = static_cast<Token>(rng.next_below(org.cfg.vocab_size));
        Token b = a;
        while (b == a) b = static_cast<Token>(rng.next_below(org.cfg.vocab_size));
        TokenSeq ctx;
        for (std::size_t i = 0; i < ctx_copies; ++i) { ctx.push_back(a); ctx.push_back(b); }
        RngStream trng = RngStream::derive(600 + s, "c6-trace");
        ToxicityTrace rep = toxicity_causal_trace(org.weights, ctx, steps, tox, trng);

        bool hit = false;
        std::vector<double> rep_entropy;
        for (const auto& st : rep.steps) {
            if (st.tau && *st.tau >= tox.gamma) hit = true;
            rep_entropy.push_back(st.entropy_nats);
        }
        if (hit) ++reached;

        TokenSeq rnd;
        for (std::size_t i = 0; i < ctx_copies * pat_len; ++i)
            rnd.push_back(static_cast<Token>(rng.next_below(org.cfg.vocab_size)));
        GenerateResult norm = generate(org.weights, rnd, steps);
        std::vector<double> norm_entropy;
        for (const auto& d : norm.step_dists) norm_entropy.push_back(entropy(d));

        try {
            const double lt = fit_decay_rate(rep_entropy, 16).lambda;
            const double ln = fit_decay_rate(norm_entropy, 16).lambda;
            if (lt > ln) ++decay_ok;
        } catch (const std::exception&) {
        }

        if (hit) {
            ++toxic_runs;
            try {
                if (check_propagation(rep, tox.gamma).windowed_mean_nondecreasing) ++prop_ok;
            } catch (const std::exception&) {
            }
        }
    }
    const bool ok = reached >= 7 && decay_ok >= 7 &&
                    (toxic_runs == 0 ? false : 10 * prop_ok >= 7 * toxic_runs);
    report(6, "toxicity dynamics on repetition-seeded contexts", ok,
           fmt("tau >= 0.65 within %zu steps on %zu/10 seeds (need >= 7); "
               "lambda_toxic > lambda_normal on %zu/10 (need >= 7); propagation flag on "
               "%zu/%zu toxic runs (need >= 70%%)",
               steps, reached, decay_ok, prop_ok, toxic_runs));
}

// ---------------------------------------------------------------- criterion 7
void criterion7(const Organism& org) {
    const std::size_t k = 64, pat_len = 2, window = org.cfg.max_seq;
    const ScalingPolicy id_pol;  // identity
    const ScalingPolicy log_pol = ScalingPolicy::parse("log:c=2");
    const ScalingPolicy lin_pol = ScalingPolicy::parse("lin");
    const ScalingPolicy const_pol = ScalingPolicy::parse("const:k=0.5");

    std::vector<double> cont_id, cont_log, cont_lin, cont_const, tau_deltas;
    std::size_t ordering_ok = 0;
    const std::size_t seeds = 10;
    for (std::uint64_t s = 0; s < seeds; ++s) {
        RngStream rng = RngStream::derive(700 + s, "c7");
        const Token a = static_cast<Token>(rng.next_below(org.cfg.vocab_size));
        Token b = a;
        while (b == a) b = static_cast<Token>(rng.next_below(org.cfg.vocab_size));
        const TokenSeq pattern = {a, b};

        RepetitionRun rid = run_repetition_cell(org.weights, pattern, k, window,
                                                org.ind_set, id_pol);
        RepetitionRun rlog = run_repetition_cell(org.weights, pattern, k, window,
                                                 org.ind_set, log_pol);
        RepetitionRun rlin = run_repetition_cell(org.weights, pattern, k, window,
                                                 org.ind_set, lin_pol);
        RepetitionRun rconst = run_repetition_cell(org.weights, pattern, k, window,
                                                   org.ind_set, const_pol);
        cont_id.push_back(static_cast<double>(rid.continuation_length));
        cont_log.push_back(static_cast<double>(rlog.continuation_length));
        cont_lin.push_back(static_cast<double>(rlin.continuation_length));
        cont_const.push_back(static_cast<double>(rconst.continuation_length));

        // Qualitative ranking: logarithmic damping breaks the curse while
        // retaining some faithful continuation; constant 0.5 is blunt at both
        // ends — either it never breaks the loop (runs out of distribution at
        // the window) or it over-suppresses and breaks sooner than log.
        const bool log_controls = rlog.continuation_length < rid.continuation_length;
        const bool const_blunt =
            rconst.ood_flag || rconst.continuation_length < rlog.continuation_length;
        if (log_controls && const_blunt) ++ordering_ok;

        // Matched-step tau under descaling vs baseline.
        TokenSeq ctx;
        for (int i = 0; i < 8; ++i) { ctx.push_back(a); ctx.push_back(b); }
        const std::size_t steps = window - ctx.size();
        DescaledGeneration dlog =
            descaled_generate(org.weights, ctx, steps, org.ind_set, log_pol);
        DescaledGeneration dbase =
            descaled_generate(org.weights, ctx, steps, org.ind_set, id_pol);
        const std::size_t n = std::min(dlog.trace.steps.size(), dbase.trace.steps.size());
        for (std::size_t i = 0; i < n; ++i)
            if (dlog.trace.steps[i].tau && dbase.trace.steps[i].tau)
                tau_deltas.push_back(*dlog.trace.steps[i].tau - *dbase.trace.steps[i].tau);
    }
    const double med_id = median(cont_id), med_log = median(cont_log);
    const double med_delta = tau_deltas.empty() ? 1.0 : median(tau_deltas);
    const bool ok = med_log < med_id && 10 * ordering_ok >= 7 * seeds && med_delta <= 0.0;
    report(7, "descaling efficacy at k=64", ok,
           fmt("median continuation log %.1f vs baseline %.1f (need strictly smaller); "
               "log-best/const-worst ordering on %zu/%zu seeds (need >= 70%%); median "
               "matched-step tau delta %.4f (need <= 0); medians lin %.1f const %.1f",
               med_log, med_id, ordering_ok, seeds, med_delta, median(cont_lin),
               median(cont_const)));
}

// ---------------------------------------------------------------- criterion 8
void criterion8(const Organism& org) {
    RngStream rng = RngStream::derive(800, "heldout-eval");
    std::vector<TokenSeq> eval_set(16);
    for (auto& seq : eval_set) seq = make_train_sequence(org.cfg, org.spec, rng);
    const HeldOutCE base = held_out_ce(org.weights, ScalingPolicy{}, org.ind_set, eval_set);
    const HeldOutCE desc =
        held_out_ce(org.weights, ScalingPolicy::parse("log:c=2"), org.ind_set, eval_set);
    const double rel = std::fabs(desc.cross_entropy_nats - base.cross_entropy_nats) /
                       base.cross_entropy_nats;
    report(8, "generation-quality guard (held-out CE under log descaling)", rel <= 0.05,
           fmt("CE %.4f descaled vs %.4f baseline, relative gap %.2f%% (cap 5%%)",
               desc.cross_entropy_nats, base.cross_entropy_nats, 100.0 * rel));
}

// ---------------------------------------------------------------- criterion 9
void criterion9(const Organism& org) {
    SweepSpec spec;
    spec.k_values = {2, 8, 64};
    spec.pattern_len = 2;
    spec.window = org.cfg.max_seq;
    spec.trials = 3;
    spec.master_seed = 909;
    spec.policy = ScalingPolicy::parse("log:c=2");

    auto emit_once = [&](const fs::path& dir) {
        fs::remove_all(dir);
        SweepReport rep = run_repetition_sweep(org.weights, spec, org.ind_set);
        return emit_report(rep, {}, dir.string());
    };
    const fs::path d1 = fs::temp_directory_path() / "ihlab_accept_rep1";
    const fs::path d2 = fs::temp_directory_path() / "ihlab_accept_rep2";
    ReportFiles f1 = emit_once(d1);
    ReportFiles f2 = emit_once(d2);
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool ok = slurp(f1.csv_path) == slurp(f2.csv_path) &&
              slurp(f1.json_path) == slurp(f2.json_path) &&
              f1.svg_paths.size() == f2.svg_paths.size();
    std::size_t bytes = slurp(f1.csv_path).size() + slurp(f1.json_path).size();
    for (std::size_t i = 0; ok && i < f1.svg_paths.size(); ++i) {
        ok = slurp(f1.svg_paths[i]) == slurp(f2.svg_paths[i]);
        bytes += slurp(f1.svg_paths[i]).size();
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
    report(9, "end-to-end determinism: sweep -> report twice, byte-identical", ok,
           fmt("%zu artifact bytes compared (csv/json/%zu svg)", bytes, f1.svg_paths.size()));
}

// --------------------------------------------------------------- criterion 10
void criterion10() {
    bool ok = true;
    std::string why = "all exact-tolerance checks held";
    RngStream rng = RngStream::derive(1010, "c10");

    // Softmax: normalization and shift invariance.
    for (int i = 0; i < 2000 && ok; ++i) {
        std::vector<double> logits(1 + rng.next_below(12));
        for (auto& v : logits) v = rng.next_gaussian() * 8.0;
        ProbVector p = softmax(logits);
        if (!p.valid()) { ok = false; why = "softmax normalization"; break; }
        const double b = rng.next_gaussian() * 20.0;
        std::vector<double> shifted = logits;
        for (auto& v : shifted) v += b;
        ProbVector q = softmax(shifted);
        for (std::size_t j = 0; j < p.p.size(); ++j)
            if (std::fabs(p.p[j] - q.p[j]) > 1e-9) { ok = false; why = "shift invariance"; }
    }

    // Entropy bounds: 0 <= H <= ln|V|; one-hot exactly 0; uniform exactly ln V.
    for (int i = 0; i < 2000 && ok; ++i) {
        std::vector<double> logits(2 + rng.next_below(12));
        for (auto& v : logits) v = rng.next_gaussian() * 8.0;
        ProbVector p = softmax(logits);
        const double h = entropy(p);
        const double lo = 0.0, hi = std::log(static_cast<double>(p.p.size()));
        if (h < lo || h > hi + 1e-12) { ok = false; why = "entropy range"; }
    }
    {
        ProbVector onehot;
        onehot.p = {0.0, 1.0, 0.0};
        if (entropy(onehot) != 0.0) { ok = false; why = "one-hot entropy"; }
        ProbVector uni;
        uni.p.assign(256, 1.0 / 256.0);
        if (std::fabs(entropy(uni) - 5.545177444479562475337857) > 1e-12) {
            ok = false;
            why = "uniform-256 entropy";
        }
    }

    // Near-deterministic regime: tail term obeys eps*(ln V + ln(1/eps)) exactly;
    // the top-mass term adds at most eps.
    for (double eps : {0.01, 0.001, 0.0001}) {
        const std::size_t V = 1000;
        ProbVector p;
        p.p.assign(V, eps / static_cast<double>(V - 1));
        p.p[0] = 1.0 - eps;
        const double h = entropy(p);
        const double bound =
            eps * (std::log(static_cast<double>(V)) + std::log(1.0 / eps));
        const double top = -(1.0 - eps) * std::log(1.0 - eps);
        if (h - top > bound + 1e-9 || h > bound + eps + 1e-9) {
            ok = false;
            why = "near-deterministic entropy bound";
        }
    }

    // RNG golden file: first 10,000 draws for the pinned seed/label.
    {
        std::ifstream in(test_data_dir() + "/golden/rng_seed42_golden.txt");
        if (!in.good()) { ok = false; why = "missing RNG golden file"; }
        RngStream golden = RngStream::derive(42, "golden");
        std::string line;
        std::size_t n = 0;
        while (ok && std::getline(in, line)) {
            if (line.empty()) continue;
            if (golden.next() != std::stoull(line, nullptr, 16)) {
                ok = false;
                why = "RNG golden mismatch at draw " + std::to_string(n);
            }
            ++n;
        }
        if (ok && n != 10000) { ok = false; why = "RNG golden file truncated"; }
    }

    report(10, "numerics suite (softmax/entropy/RNG golden)", ok, why);
}

}  // namespace

int main() {
    std::printf("acceptance gate — %s\n", "induction-head repetition laboratory");
    criterion1();
    criterion2();
    criterion3();
    criterion4();

    Organism org;
    try {
        org = train_organism();
    } catch (const std::exception& e) {
        std::printf("organism training failed: %s\n", e.what());
        for (int n : {5, 6, 7, 8, 9}) report(n, "requires trained organism", false, e.what());
        std::printf("failures: %d\n", g_failures);
        return g_failures;
    }
    criterion5(org);
    criterion6(org);
    criterion7(org);
    criterion8(org);
    criterion9(org);
    criterion10();

    std::printf("failures: %d\n", g_failures);
    return g_failures;
}
