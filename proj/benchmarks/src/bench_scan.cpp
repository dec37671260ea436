#include <benchmark/benchmark.h>

#include "hades/block.hpp"
#include "hades/model.hpp"
#include "hades/rng.hpp"
#include "hades/ssm.hpp"

namespace {

hades::ModelConfig bench_config() {
    hades::ModelConfig c;
    c.d = 64;
    c.M = 8;
    c.H = 4;
    c.S = 2;
    c.P = 16;
    c.N = 16;
    c.d_conv = 4;
    c.L = 2;
    c.V = 256;
    return c;
}

void BM_ScanHead(benchmark::State& state) {
    const std::size_t T = static_cast<std::size_t>(state.range(0));
    const std::size_t N = 16, P = 16;
    hades::Rng rng(1);
    hades::HeadDiscretized hd;
    hd.T = T;
    hd.N = N;
    hd.D = 1.0;
    hd.a.resize(T);
    hd.delta.resize(T);
    hd.Bbar.resize(T * N);
    hd.C.resize(T * N);
    for (std::size_t t = 0; t < T; ++t) {
        hd.delta[t] = 0.1 + rng.next_double();
        hd.a[t] = hades::decay(hd.delta[t], 0.0);
    }
    for (auto& v : hd.Bbar) v = rng.next_normal();
    for (auto& v : hd.C) v = rng.next_normal();
    std::vector<double> x(T * P);
    for (auto& v : x) v = rng.next_normal();
    for (auto _ : state) {
        auto y = hades::scan_head(hd, x, P);
        benchmark::DoNotOptimize(y);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_ScanHead)->Arg(256)->Arg(1024)->Arg(4096);

void BM_BlockPrefill(benchmark::State& state) {
    const std::size_t T = static_cast<std::size_t>(state.range(0));
    hades::ModelConfig c = bench_config();
    hades::Rng rng(2);
    hades::BlockParams p = hades::random_block_params(c, rng);
    std::vector<double> u(T * c.d);
    for (auto& v : u) v = rng.next_normal() * 0.1;
    for (auto _ : state) {
        hades::InferenceCache cache = hades::make_cache(c);
        auto res = hades::block_prefill(u, T, p, c, cache);
        benchmark::DoNotOptimize(res.out);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_BlockPrefill)->Arg(128)->Arg(512);

void BM_DecodeStep(benchmark::State& state) {
    hades::ModelConfig c = bench_config();
    hades::Rng rng(3);
    hades::Model m = hades::random_model(c, rng);
    hades::DecodeState ds = hades::make_decode_state(m);
    std::uint32_t id = 65;
    for (auto _ : state) {
        auto logits = hades::model_decode_step(m, id, ds);
        benchmark::DoNotOptimize(logits);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DecodeStep);

}  // namespace

BENCHMARK_MAIN();
