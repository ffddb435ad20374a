#include "ihlab/transformer.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace ihlab {

namespace {
std::atomic<std::uint64_t> g_pass_count{0};
}

std::uint64_t forward_pass_count() { return g_pass_count.load(); }

void ModelConfig::validate() const {
    if (n_layers == 0 || n_heads == 0 || d_model == 0 || d_head == 0)
        throw std::invalid_argument("ModelConfig: zero dimension");
    if (n_heads * d_head != d_model)
        throw std::invalid_argument("ModelConfig: n_heads * d_head != d_model");
    if (max_seq < 2) throw std::invalid_argument("ModelConfig: max_seq < 2");
    if (vocab_size < 4) throw std::invalid_argument("ModelConfig: vocab_size < 4");
}

ModelWeights ModelWeights::zeros(const ModelConfig& cfg) {
    cfg.validate();
    ModelWeights w;
    w.cfg = cfg;
    w.token_embed = Matrix(cfg.vocab_size, cfg.d_model);
    w.pos_embed = Matrix(cfg.max_seq, cfg.d_model);
    w.heads.resize(cfg.n_layers);
    for (auto& layer : w.heads) {
        layer.resize(cfg.n_heads);
        for (auto& h : layer) {
            h.w_q = Matrix(cfg.d_model, cfg.d_head);
            h.w_k = Matrix(cfg.d_model, cfg.d_head);
            h.w_v = Matrix(cfg.d_model, cfg.d_head);
            h.w_o = Matrix(cfg.d_head, cfg.d_model);
        }
    }
    w.unembed = Matrix(cfg.d_model, cfg.vocab_size);
    return w;
}

void ModelWeights::validate() const {
    cfg.validate();
    auto check = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
        if (m.rows != r || m.cols != c)
            throw std::invalid_argument(std::string("ModelWeights: bad shape for ") + name);
        if (!m.is_finite())
            throw std::invalid_argument(std::string("ModelWeights: non-finite ") + name);
    };
    check(token_embed, cfg.vocab_size, cfg.d_model, "token_embed");
    check(pos_embed, cfg.max_seq, cfg.d_model, "pos_embed");
    check(unembed, cfg.d_model, cfg.vocab_size, "unembed");
    if (heads.size() != cfg.n_layers)
        throw std::invalid_argument("ModelWeights: layer count mismatch");
    for (const auto& layer : heads) {
        if (layer.size() != cfg.n_heads)
            throw std::invalid_argument("ModelWeights: head count mismatch");
        for (const auto& h : layer) {
            check(h.w_q, cfg.d_model, cfg.d_head, "w_q");
            check(h.w_k, cfg.d_model, cfg.d_head, "w_k");
            check(h.w_v, cfg.d_model, cfg.d_head, "w_v");
            check(h.w_o, cfg.d_head, cfg.d_model, "w_o");
        }
    }
}

void HookSet::validate() const {
    for (const auto& [id, factor] : scale) {
        (void)factor;
        if (patch.count(id))
            throw std::invalid_argument("HookSet: head in both patch and scale");
    }
}

ForwardResult forward(const ModelWeights& w, const TokenSeq& tokens,
                      const HookSet& hooks) {
    const ModelConfig& cfg = w.cfg;
    const std::size_t T = tokens.size();
    if (T == 0) throw std::invalid_argument("forward: empty input");
    if (T > cfg.max_seq) throw std::invalid_argument("forward: sequence too long");
    for (Token t : tokens)
        if (t >= cfg.vocab_size) throw std::invalid_argument("forward: token out of vocabulary");
    hooks.validate();
    for (const auto& [id, repl] : hooks.patch) {
        if (id.layer >= cfg.n_layers || id.head >= cfg.n_heads)
            throw std::invalid_argument("forward: patch head out of range");
        if (repl.rows != T || repl.cols != cfg.d_head)
            throw std::invalid_argument("forward: patch vector shape mismatch");
    }
    g_pass_count.fetch_add(1, std::memory_order_relaxed);

    ForwardResult out;
    ActivationCache& cache = out.cache;

    Matrix x(T, cfg.d_model);
    for (std::size_t t = 0; t < T; ++t) {
        const double* te = w.token_embed.row(tokens[t]);
        const double* pe = w.pos_embed.row(t);
        double* xr = x.row(t);
        for (std::size_t d = 0; d < cfg.d_model; ++d) xr[d] = te[d] + pe[d];
    }
    cache.residual.push_back(x);

    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));

    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        Matrix x_next = x;
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const HeadId id{l, h};
            const HeadWeights& hw = w.heads[l][h];

            Matrix q = matmul(x, hw.w_q);
            Matrix k = matmul(x, hw.w_k);
            Matrix v = matmul(x, hw.w_v);

            Matrix attn(T, T);
            Matrix head_out(T, cfg.d_head);
            std::vector<double> row(T);
            for (std::size_t i = 0; i < T; ++i) {
                for (std::size_t j = 0; j <= i; ++j)
                    row[j] = dot(q.row(i), k.row(j), cfg.d_head) * inv_sqrt_dh;
                softmax_inplace(row.data(), i + 1);
                double* ar = attn.row(i);
                double* hr = head_out.row(i);
                for (std::size_t j = 0; j <= i; ++j) {
                    ar[j] = row[j];
                    const double* vr = v.row(j);
                    for (std::size_t d = 0; d < cfg.d_head; ++d) hr[d] += row[j] * vr[d];
                }
            }

            if (auto it = hooks.patch.find(id); it != hooks.patch.end()) {
                if (hooks.patch_final_only) {
                    const double* src = it->second.row(T - 1);
                    double* dst = head_out.row(T - 1);
                    for (std::size_t d = 0; d < cfg.d_head; ++d) dst[d] = src[d];
                } else {
                    head_out = it->second;
                }
            } else if (auto is = hooks.scale.find(id); is != hooks.scale.end()) {
                for (double& val : head_out.data) val *= is->second;
            }

            if (hooks.wants_capture(id))
                cache.heads[id] = HeadCapture{attn, head_out};

            for (std::size_t i = 0; i < T; ++i)
                vec_matmul_add(head_out.row(i), hw.w_o, x_next.row(i));
        }
        x = std::move(x_next);
        cache.residual.push_back(x);
    }

    cache.logits = matmul(x, w.unembed);
    out.logits = cache.logits;
    return out;
}

std::vector<double> head_contribution(const ActivationCache& cache,
                                      const ModelWeights& w, HeadId id,
                                      std::size_t position) {
    auto it = cache.heads.find(id);
    if (it == cache.heads.end())
        throw std::invalid_argument("head_contribution: head not captured");
    if (position >= it->second.head_out.rows)
        throw std::invalid_argument("head_contribution: position out of range");
    std::vector<double> out(w.cfg.d_model, 0.0);
    vec_matmul_add(it->second.head_out.row(position), w.head(id).w_o, out.data());
    return out;
}

namespace {

Token decode_token(std::span<const double> logits, const DecodeSpec& spec,
                   RngStream* rng, ProbVector& dist_out) {
    if (spec.kind == DecodeKind::Greedy) {
        dist_out = softmax(logits);
        Token best = 0;
        double bv = logits[0];
        for (std::size_t i = 1; i < logits.size(); ++i)
            if (logits[i] > bv) { bv = logits[i]; best = static_cast<Token>(i); }
        return best;
    }
    if (!rng) throw std::invalid_argument("generate: temperature decode needs an RngStream");
    if (spec.temperature <= 0.0) throw std::invalid_argument("generate: temperature must be > 0");
    std::vector<double> scaled(logits.begin(), logits.end());
    for (double& v : scaled) v /= spec.temperature;
    dist_out = softmax(scaled);
    const double u = rng->next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < dist_out.p.size(); ++i) {
        acc += dist_out.p[i];
        if (u < acc) return static_cast<Token>(i);
    }
    return static_cast<Token>(dist_out.p.size() - 1);
}

}  // namespace

GenerateResult generate(const ModelWeights& w, const TokenSeq& prompt,
                        std::size_t steps, const GenerateOptions& opts,
                        RngStream* rng) {
    if (prompt.empty()) throw std::invalid_argument("generate: empty prompt");
    if (steps == 0) throw std::invalid_argument("generate: steps must be >= 1");
    if (prompt.size() > w.cfg.max_seq)
        throw std::invalid_argument("generate: prompt exceeds max_seq");

    GenerateResult res;
    TokenSeq ctx = prompt;
    for (std::size_t t = 1; t <= steps; ++t) {
        if (ctx.size() >= w.cfg.max_seq) {
            res.ood = true;  // window hit; result truncated
            break;
        }
        HookSet hooks = opts.hooks;
        if (opts.step_scale) {
            for (const auto& [id, f] : opts.step_scale(t)) hooks.scale[id] = f;
        }
        ForwardResult fr = forward(w, ctx, hooks);
        std::span<const double> last(fr.logits.row(ctx.size() - 1), w.cfg.vocab_size);
        ProbVector dist;
        Token tok = decode_token(last, opts.decode, rng, dist);
        res.step_dists.push_back(std::move(dist));
        if (opts.keep_step_caches) res.step_caches.push_back(std::move(fr.cache));
        res.tokens.push_back(tok);
        ctx.push_back(tok);
    }
    return res;
}

}  // namespace ihlab
