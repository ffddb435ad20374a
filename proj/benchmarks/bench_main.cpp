#include <benchmark/benchmark.h>

#include "ihlab/copy_task.hpp"
#include "ihlab/patching.hpp"
#include "ihlab/training.hpp"
#include "ihlab/transformer.hpp"
#include "ihlab/wiring.hpp"

using namespace ihlab;

namespace {

TokenSeq random_tokens(std::size_t n, std::size_t vocab, RngStream& rng) {
    TokenSeq out(n);
    for (auto& t : out) t = static_cast<Token>(rng.next_below(vocab));
    return out;
}

void BM_ForwardWired64(benchmark::State& state) {
    ModelConfig cfg = wired_config(16, 64);
    ModelWeights w = wire_induction_model(cfg, 30.0);
    RngStream rng = RngStream::derive(1, "bench-fwd");
    TokenSeq toks = random_tokens(64, cfg.vocab_size, rng);
    for (auto _ : state) {
        ForwardResult fr = forward(w, toks);
        benchmark::DoNotOptimize(fr.logits.data.data());
    }
}

void BM_ForwardCaptureAll(benchmark::State& state) {
    ModelConfig cfg = wired_config(16, 64);
    ModelWeights w = wire_induction_model(cfg, 30.0);
    RngStream rng = RngStream::derive(2, "bench-cap");
    TokenSeq toks = random_tokens(64, cfg.vocab_size, rng);
    HookSet hooks;
    hooks.capture_all = true;
    for (auto _ : state) {
        ForwardResult fr = forward(w, toks, hooks);
        benchmark::DoNotOptimize(fr.cache.heads.size());
    }
}

void BM_Generate32(benchmark::State& state) {
    ModelConfig cfg = wired_config(16, 64);
    ModelWeights w = wire_induction_model(cfg, 30.0);
    TokenSeq prompt = {2, 9, 2, 9};
    for (auto _ : state) {
        GenerateResult r = generate(w, prompt, 32);
        benchmark::DoNotOptimize(r.tokens.data());
    }
}

void BM_PatchProtocol(benchmark::State& state) {
    ModelConfig cfg = wired_config(16, 24);
    ModelWeights w = wire_induction_model(cfg, 30.0);
    RngStream inst_rng = RngStream::derive(3, "bench-inst");
    std::vector<CopyTaskInstance> instances;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
        instances.push_back(make_copy_instance(cfg.vocab_size, 8, inst_rng));
    for (auto _ : state) {
        RngStream rng = RngStream::derive(3, "bench-patch");
        ImportanceMap m = run_patch_protocol(w, instances, rng);
        benchmark::DoNotOptimize(m.heads.size());
    }
}

void BM_LossAndGrad(benchmark::State& state) {
    ModelConfig cfg{2, 2, 32, 16, 16, 64};
    TrainSpec spec;
    spec.seed = 4;
    ModelWeights w = init_weights(cfg, spec);
    RngStream rng = RngStream::derive(4, "bench-grad");
    std::vector<TokenSeq> batch;
    for (int b = 0; b < 8; ++b) batch.push_back(random_tokens(48, cfg.vocab_size, rng));
    for (auto _ : state) {
        LossAndGrad lg = loss_and_grad(w, batch);
        benchmark::DoNotOptimize(lg.loss);
    }
}

}  // namespace

BENCHMARK(BM_ForwardWired64);
BENCHMARK(BM_ForwardCaptureAll);
BENCHMARK(BM_Generate32);
BENCHMARK(BM_PatchProtocol)->Arg(4)->Arg(16);
BENCHMARK(BM_LossAndGrad);

BENCHMARK_MAIN();
