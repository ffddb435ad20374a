#include "ihlab/training.hpp"

#include <cmath>
#include <stdexcept>

#include "ihlab/numerics.hpp"

namespace ihlab {

void TrainSpec::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainSpec: learning_rate must be > 0");
    if (batch_size == 0) throw std::invalid_argument("TrainSpec: batch_size must be >= 1");
    if (seg_min < 2 || seg_max < seg_min) throw std::invalid_argument("TrainSpec: bad segment range");
    if (rep_min < 2 || rep_max < rep_min) throw std::invalid_argument("TrainSpec: bad repeat range");
    if (seq_len < seg_max * rep_min) throw std::invalid_argument("TrainSpec: seq_len too short for repeats");
}

TokenSeq make_train_sequence(const ModelConfig& cfg, const TrainSpec& spec,
                             RngStream& rng) {
    TokenSeq seq(spec.seq_len);
    for (auto& t : seq) t = static_cast<Token>(rng.next_below(cfg.vocab_size));

    const std::size_t seg_len = spec.seg_min + rng.next_below(spec.seg_max - spec.seg_min + 1);
    const std::size_t reps = spec.rep_min + rng.next_below(spec.rep_max - spec.rep_min + 1);
    TokenSeq seg(seg_len);
    for (auto& t : seg) t = static_cast<Token>(rng.next_below(cfg.vocab_size));

    // Place the repeats at random non-overlapping offsets; skip collisions.
    std::vector<bool> used(spec.seq_len, false);
    std::size_t placed = 0;
    for (std::size_t attempt = 0; attempt < reps * 8 && placed < reps; ++attempt) {
        const std::size_t start = rng.next_below(spec.seq_len - seg_len + 1);
        bool free = true;
        for (std::size_t i = start; i < start + seg_len; ++i)
            if (used[i]) { free = false; break; }
        if (!free) continue;
        for (std::size_t i = 0; i < seg_len; ++i) {
            seq[start + i] = seg[i];
            used[start + i] = true;
        }
        ++placed;
    }
    return seq;
}

ModelWeights init_weights(const ModelConfig& cfg, const TrainSpec& spec) {
    ModelWeights w = ModelWeights::zeros(cfg);
    RngStream rng = RngStream::derive(spec.seed, "init");
    auto fill = [&](Matrix& m) {
        for (double& v : m.data) v = spec.init_std * rng.next_gaussian();
    };
    fill(w.token_embed);
    fill(w.pos_embed);
    for (auto& layer : w.heads)
        for (auto& h : layer) { fill(h.w_q); fill(h.w_k); fill(h.w_v); fill(h.w_o); }
    fill(w.unembed);
    return w;
}

namespace {

// Intermediates for one head, kept for the backward pass.
struct HeadTape {
    Matrix q, k, v;      // T x d_head
    Matrix attn;         // T x T
    Matrix head_out;     // T x d_head
};

struct LayerTape {
    Matrix x_in;  // T x d_model
    std::vector<HeadTape> heads;
};

void accumulate_outer(Matrix& grad, const double* a, const double* b,
                      std::size_t n_a, std::size_t n_b) {
    // grad[i][j] += a[i] * b[j]
    for (std::size_t i = 0; i < n_a; ++i) {
        if (a[i] == 0.0) continue;
        double* row = grad.row(i);
        for (std::size_t j = 0; j < n_b; ++j) row[j] += a[i] * b[j];
    }
}

// Forward + backward for one sequence; accumulates into grad, returns the
// summed cross-entropy and position count.
std::pair<double, std::size_t> backprop_sequence(const ModelWeights& w,
                                                 const TokenSeq& tokens,
                                                 ModelWeights& grad) {
    const ModelConfig& cfg = w.cfg;
    const std::size_t T = tokens.size();
    const std::size_t D = cfg.d_model;
    const std::size_t DH = cfg.d_head;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(DH));

    // ---- forward, taping intermediates ----
    Matrix x(T, D);
    for (std::size_t t = 0; t < T; ++t) {
        const double* te = w.token_embed.row(tokens[t]);
        const double* pe = w.pos_embed.row(t);
        double* xr = x.row(t);
        for (std::size_t d = 0; d < D; ++d) xr[d] = te[d] + pe[d];
    }

    std::vector<LayerTape> tape(cfg.n_layers);
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        LayerTape& lt = tape[l];
        lt.x_in = x;
        lt.heads.resize(cfg.n_heads);
        Matrix x_next = x;
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const HeadWeights& hw = w.heads[l][h];
            HeadTape& ht = lt.heads[h];
            ht.q = matmul(x, hw.w_q);
            ht.k = matmul(x, hw.w_k);
            ht.v = matmul(x, hw.w_v);
            ht.attn = Matrix(T, T);
            ht.head_out = Matrix(T, DH);
            std::vector<double> row(T);
            for (std::size_t i = 0; i < T; ++i) {
                for (std::size_t j = 0; j <= i; ++j)
                    row[j] = dot(ht.q.row(i), ht.k.row(j), DH) * inv_sqrt_dh;
                softmax_inplace(row.data(), i + 1);
                double* ar = ht.attn.row(i);
                double* hr = ht.head_out.row(i);
                for (std::size_t j = 0; j <= i; ++j) {
                    ar[j] = row[j];
                    const double* vr = ht.v.row(j);
                    for (std::size_t d = 0; d < DH; ++d) hr[d] += row[j] * vr[d];
                }
            }
            for (std::size_t i = 0; i < T; ++i)
                vec_matmul_add(ht.head_out.row(i), hw.w_o, x_next.row(i));
        }
        x = std::move(x_next);
    }

    // ---- loss + dlogits ----
    double ce_sum = 0.0;
    const std::size_t n_pred = T - 1;
    Matrix dx(T, D);
    {
        Matrix logits = matmul(x, w.unembed);
        Matrix dlogits(T, cfg.vocab_size);
        for (std::size_t t = 0; t + 1 < T; ++t) {
            double* lr = logits.row(t);
            softmax_inplace(lr, cfg.vocab_size);
            const Token target = tokens[t + 1];
            ce_sum += -std::log(lr[target]);
            double* dl = dlogits.row(t);
            for (std::size_t v = 0; v < cfg.vocab_size; ++v) dl[v] = lr[v];
            dl[target] -= 1.0;
        }
        // dU += x^T dlogits ; dx = dlogits U^T
        for (std::size_t t = 0; t + 1 < T; ++t) {
            accumulate_outer(grad.unembed, x.row(t), dlogits.row(t), D, cfg.vocab_size);
            const double* dl = dlogits.row(t);
            double* dxr = dx.row(t);
            for (std::size_t d = 0; d < D; ++d)
                dxr[d] = dot(w.unembed.row(d), dl, cfg.vocab_size);
        }
    }

    // ---- backward through layers ----
    for (std::size_t l = cfg.n_layers; l-- > 0;) {
        const LayerTape& lt = tape[l];
        Matrix dx_in = dx;  // residual path
        for (std::size_t h = 0; h < cfg.n_heads; ++h) {
            const HeadWeights& hw = w.heads[l][h];
            HeadWeights& ghw = grad.heads[l][h];
            const HeadTape& ht = lt.heads[h];

            // d head_out and dW_O
            Matrix dho(T, DH);
            for (std::size_t i = 0; i < T; ++i) {
                const double* dxr = dx.row(i);
                double* dhr = dho.row(i);
                for (std::size_t d = 0; d < DH; ++d)
                    dhr[d] = dot(hw.w_o.row(d), dxr, D);
                accumulate_outer(ghw.w_o, ht.head_out.row(i), dxr, DH, D);
            }

            Matrix dq(T, DH), dk(T, DH), dv(T, DH);
            std::vector<double> da(T), ds(T);
            for (std::size_t i = 0; i < T; ++i) {
                const double* dhr = dho.row(i);
                const double* ar = ht.attn.row(i);
                // dv_j += a_ij * dho_i ; da_ij = dho_i . v_j
                for (std::size_t j = 0; j <= i; ++j) {
                    const double* vr = ht.v.row(j);
                    double* dvr = dv.row(j);
                    const double a_ij = ar[j];
                    double acc = 0.0;
                    for (std::size_t d = 0; d < DH; ++d) {
                        dvr[d] += a_ij * dhr[d];
                        acc += dhr[d] * vr[d];
                    }
                    da[j] = acc;
                }
                // softmax backward on the causal row
                double inner = 0.0;
                for (std::size_t j = 0; j <= i; ++j) inner += ar[j] * da[j];
                for (std::size_t j = 0; j <= i; ++j) ds[j] = ar[j] * (da[j] - inner);
                // dq_i += ds_ij k_j / sqrt(dh); dk_j += ds_ij q_i / sqrt(dh)
                double* dqr = dq.row(i);
                for (std::size_t j = 0; j <= i; ++j) {
                    const double s = ds[j] * inv_sqrt_dh;
                    if (s == 0.0) continue;
                    const double* kr = ht.k.row(j);
                    double* dkr = dk.row(j);
                    const double* qr = ht.q.row(i);
                    for (std::size_t d = 0; d < DH; ++d) {
                        dqr[d] += s * kr[d];
                        dkr[d] += s * qr[d];
                    }
                }
            }

            // dW_{q,k,v} += x_in^T d{q,k,v}; dx_in += d{q,k,v} W^T
            for (std::size_t i = 0; i < T; ++i) {
                const double* xr = lt.x_in.row(i);
                accumulate_outer(ghw.w_q, xr, dq.row(i), D, DH);
                accumulate_outer(ghw.w_k, xr, dk.row(i), D, DH);
                accumulate_outer(ghw.w_v, xr, dv.row(i), D, DH);
                double* dxi = dx_in.row(i);
                const double* dqr = dq.row(i);
                const double* dkr = dk.row(i);
                const double* dvr = dv.row(i);
                for (std::size_t d = 0; d < D; ++d) {
                    dxi[d] += dot(hw.w_q.row(d), dqr, DH) +
                              dot(hw.w_k.row(d), dkr, DH) +
                              dot(hw.w_v.row(d), dvr, DH);
                }
            }
        }
        dx = std::move(dx_in);
    }

    // ---- embeddings ----
    for (std::size_t t = 0; t < T; ++t) {
        const double* dxr = dx.row(t);
        double* gte = grad.token_embed.row(tokens[t]);
        double* gpe = grad.pos_embed.row(t);
        for (std::size_t d = 0; d < D; ++d) {
            gte[d] += dxr[d];
            gpe[d] += dxr[d];
        }
    }

    return {ce_sum, n_pred};
}

void scale_weights(ModelWeights& w, double s) {
    auto sc = [&](Matrix& m) { for (double& v : m.data) v *= s; };
    sc(w.token_embed);
    sc(w.pos_embed);
    for (auto& layer : w.heads)
        for (auto& h : layer) { sc(h.w_q); sc(h.w_k); sc(h.w_v); sc(h.w_o); }
    sc(w.unembed);
}

template <typename F>
void for_each_matrix(ModelWeights& w, F&& f) {
    f(w.token_embed);
    f(w.pos_embed);
    for (auto& layer : w.heads)
        for (auto& h : layer) { f(h.w_q); f(h.w_k); f(h.w_v); f(h.w_o); }
    f(w.unembed);
}

}  // namespace

LossAndGrad loss_and_grad(const ModelWeights& w, const std::vector<TokenSeq>& batch) {
    if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
    for (const auto& seq : batch) {
        if (seq.size() < 2) throw std::invalid_argument("loss_and_grad: sequence too short");
        if (seq.size() > w.cfg.max_seq) throw std::invalid_argument("loss_and_grad: sequence too long");
        for (Token t : seq)
            if (t >= w.cfg.vocab_size) throw std::invalid_argument("loss_and_grad: token out of vocabulary");
    }
    LossAndGrad out;
    out.grad = ModelWeights::zeros(w.cfg);
    double ce_sum = 0.0;
    std::size_t n_pred = 0;
    for (const auto& seq : batch) {
        auto [ce, n] = backprop_sequence(w, seq, out.grad);
        ce_sum += ce;
        n_pred += n;
    }
    out.loss = ce_sum / static_cast<double>(n_pred);
    scale_weights(out.grad, 1.0 / static_cast<double>(n_pred));
    return out;
}

TrainResult train_toy_model(const ModelConfig& cfg, const TrainSpec& spec) {
    cfg.validate();
    spec.validate();
    if (spec.seq_len > cfg.max_seq)
        throw std::invalid_argument("train_toy_model: seq_len exceeds max_seq");

    TrainResult res;
    res.weights = init_weights(cfg, spec);
    if (spec.steps == 0) return res;

    ModelWeights m = ModelWeights::zeros(cfg);
    ModelWeights v = ModelWeights::zeros(cfg);
    RngStream data_rng = RngStream::derive(spec.seed, "corpus");

    for (std::size_t step = 1; step <= spec.steps; ++step) {
        std::vector<TokenSeq> batch(spec.batch_size);
        for (auto& seq : batch) seq = make_train_sequence(cfg, spec, data_rng);

        LossAndGrad lg = loss_and_grad(res.weights, batch);
        if (!std::isfinite(lg.loss))
            throw std::runtime_error("train_toy_model: loss diverged (NaN/Inf) at step " +
                                     std::to_string(step));
        res.loss_trace.push_back(lg.loss);

        const double warm = spec.warmup_steps > 0
            ? std::min(1.0, static_cast<double>(step) / static_cast<double>(spec.warmup_steps))
            : 1.0;
        const double lr = spec.learning_rate * warm;
        const double b1 = spec.adam_beta1, b2 = spec.adam_beta2;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));

        // Adam update, one flat walk over all matrices in a fixed order.
        std::vector<Matrix*> wm, mm, vm, grads;
        for_each_matrix(res.weights, [&](Matrix& mat) { wm.push_back(&mat); });
        for_each_matrix(m, [&](Matrix& mat) { mm.push_back(&mat); });
        for_each_matrix(v, [&](Matrix& mat) { vm.push_back(&mat); });
        for_each_matrix(lg.grad, [&](Matrix& mat) { grads.push_back(&mat); });
        for (std::size_t i = 0; i < wm.size(); ++i) {
            auto& wd = wm[i]->data;
            auto& md = mm[i]->data;
            auto& vd = vm[i]->data;
            auto& gd = grads[i]->data;
            for (std::size_t j = 0; j < wd.size(); ++j) {
                md[j] = b1 * md[j] + (1.0 - b1) * gd[j];
                vd[j] = b2 * vd[j] + (1.0 - b2) * gd[j] * gd[j];
                const double mhat = md[j] / bc1;
                const double vhat = vd[j] / bc2;
                wd[j] -= lr * mhat / (std::sqrt(vhat) + spec.adam_eps);
            }
        }
    }
    return res;
}

}  // namespace ihlab
