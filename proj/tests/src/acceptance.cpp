// Acceptance suite: one criterion per number, one pass/fail line each.
// Usage: hades_acceptance [N | all]
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "hades/analysis.hpp"
#include "hades/block.hpp"
#include "hades/dft.hpp"
#include "hades/harness.hpp"
#include "hades/model.hpp"
#include "hades/params_flops.hpp"
#include "hades/rng.hpp"
#include "hades/router.hpp"
#include "hades/ssm.hpp"
#include "hades/trainer.hpp"

using namespace hades;

namespace {

ModelConfig random_tiny_cfg(Rng& r) {
    ModelConfig c;
    c.d = 4 + r.next_below(8);
    c.S = 1 + r.next_below(2);
    c.H = c.S + 1 + r.next_below(2);
    c.M = c.H + r.next_below(3);
    c.P = 2 + r.next_below(3);
    c.N = 2 + r.next_below(3);
    c.d_conv = 2 + r.next_below(3);
    c.L = 1 + r.next_below(2);
    c.V = 8 + r.next_below(24);
    c.tie_embeddings = r.next_below(2) == 1;
    return c;
}

// --- criterion 1: scan vs materialized filter matrix -----------------------

bool c1() {
    Rng r(101);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t T = 1 + r.next_below(64);
        const std::size_t N = 1 + r.next_below(8);
        const std::size_t P = 1 + r.next_below(4);
        HeadDiscretized h;
        h.T = T;
        h.N = N;
        h.a.resize(T);
        h.delta.resize(T);
        h.Bbar.resize(T * N);
        h.C.resize(T * N);
        for (std::size_t t = 0; t < T; ++t) {
            h.delta[t] = 0.05 + r.next_double();
            h.a[t] = decay(h.delta[t], r.next_normal() * 0.5);
        }
        for (auto& v : h.Bbar) v = r.next_normal();
        for (auto& v : h.C) v = r.next_normal();
        h.D = r.next_normal();
        std::vector<double> x(T * P);
        for (auto& v : x) v = r.next_normal();

        auto y = scan_head(h, x, P);
        auto fm = materialize_matrix(h);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t p = 0; p < P; ++p) {
                double acc = 0.0;
                for (std::size_t s = 0; s <= t; ++s) acc += fm.at(t, s) * x[s * P + p];
                const double ref = y[t * P + p];
                const double rel =
                    std::abs(ref - acc) / std::max(std::abs(ref), 1e-30);
                worst = std::max(worst, std::min(rel, std::abs(ref - acc)));
            }
    }
    std::printf("  max relative error %.3e over 100 heads\n", worst);
    return worst < 1e-10;
}

// --- criterion 2: prefill/decode parity -------------------------------------

bool c2() {
    Rng meta(202);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        auto cfg = random_tiny_cfg(meta);
        if (rep % 3 == 1) cfg.mode = RouterMode::kPositionBias;
        if (rep % 3 == 2) cfg.mode = RouterMode::kInputOnly;
        Rng r(1000 + rep);
        auto m = random_model(cfg, r);
        const std::size_t T = 4 + meta.next_below(12);
        std::vector<std::uint32_t> ids(T);
        for (auto& v : ids) v = std::uint32_t(meta.next_below(cfg.V));

        auto full = model_forward(m, ids);
        auto st = make_decode_state(m);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<SelectionRecord> recs;
            auto logits = model_decode_step(m, ids[t], st, &recs);
            for (std::size_t v = 0; v < cfg.V; ++v)
                worst = std::max(worst,
                                 std::abs(logits[v] - full.logits[t * cfg.V + v]));
            for (std::size_t l = 0; l < cfg.L; ++l)
                if (recs[l].expert_ids != full.records[l][t].expert_ids) return false;
        }
    }
    std::printf("  max |prefill - decode| %.3e over 20 models\n", worst);
    return worst < 1e-8;
}

// --- criterion 3: gradient check --------------------------------------------

bool c3() {
    ModelConfig cfg;
    cfg.d = 16;
    cfg.M = 4;
    cfg.H = 2;
    cfg.S = 1;
    cfg.P = 8;
    cfg.N = 4;
    cfg.d_conv = 2;
    cfg.L = 2;
    cfg.V = 32;
    cfg.epsilon = 1e-2;
    std::size_t done = 0, skipped = 0;
    double worst = 0.0;
    std::string worst_param;
    for (std::uint64_t seed = 0; done < 20 && seed < 60; ++seed) {
        auto res = grad_check(cfg, seed);
        if (res.skipped) {
            skipped++;
            continue;
        }
        done++;
        if (res.max_rel_err > worst) {
            worst = res.max_rel_err;
            worst_param = res.worst_param;
        }
        if (!res.pass) {
            std::printf("  seed %llu FAILED: rel %.3e at %s\n",
                        (unsigned long long)seed, res.max_rel_err,
                        res.worst_param.c_str());
            return false;
        }
    }
    std::printf("  20 seeds pass (%zu tie-skipped), worst rel %.3e at %s\n",
                skipped, worst, worst_param.c_str());
    return done == 20;
}

// --- criterion 4: parameter arithmetic ---------------------------------------

bool c4() {
    ModelConfig paper;
    paper.d = 1024;
    paper.M = 32;
    paper.H = 16;
    paper.S = 8;
    paper.P = 64;
    paper.N = 128;
    paper.d_conv = 4;
    paper.L = 48;
    paper.V = 50277;
    auto rep = count_params(paper);
    std::printf("  reduction %llu (alt %llu), result %llu\n",
                (unsigned long long)rep.reduction,
                (unsigned long long)rep.reduction_alt,
                (unsigned long long)rep.published_result);
    if (rep.reduction != 150407424ULL) return false;
    if (rep.reduction_alt != 150407328ULL) return false;
    if (!rep.has_published_reference) return false;
    if (rep.published_baseline != 368346624ULL) return false;
    if (rep.published_result != 217939200ULL) return false;

    Rng r(404);
    for (int rep_i = 0; rep_i < 20; ++rep_i) {
        auto cfg = random_tiny_cfg(r);
        auto pr = count_params(cfg);
        Rng mr(500 + rep_i);
        auto m = random_model(cfg, mr);
        if (pr.constructed_total != total_param_count(m)) {
            std::printf("  constructed mismatch on config %d\n", rep_i);
            return false;
        }
    }
    std::printf("  constructed counts match enumeration on 20 configs\n");
    return true;
}

// --- criterion 5: flops ratio -----------------------------------------------

bool c5() {
    ModelConfig paper;
    paper.d = 1024;
    paper.M = 32;
    paper.H = 16;
    paper.S = 8;
    paper.P = 64;
    paper.N = 128;
    paper.d_conv = 4;
    paper.L = 48;
    paper.V = 50277;
    auto rep = count_flops(paper, 2048);
    std::printf("  ratio %.4f (target 0.5 +/- 10%%), routing share %.4f%%\n",
                rep.ratio, 100.0 * rep.routing_share);
    const double target = double(paper.H) / double(paper.M);
    return std::abs(rep.ratio - target) <= 0.1 * target && rep.routing_share < 0.05;
}

// --- criterion 6: loss identities -------------------------------------------

bool c6() {
    std::vector<double> constant{3, 3, 3, 3, 7, 7, 7, 7};
    if (balance_loss(constant, 2, 4, 1e-10) != 0.0) return false;

    std::vector<double> ortho{1, 0, 0, 0, 1, 0};  // H=3? no: H=2, P=3 rows (1,0,0),(0,1,0)
    if (std::abs(diversity_loss(ortho, 1, 2, 3)) > 1e-10) return false;
    std::vector<double> same{2, 1, 2, 1};
    if (std::abs(diversity_loss(same, 1, 2, 2) - 0.5) > 1e-10) return false;

    for (double delta : {1e-3, 1e-2, 0.1, 1.0, 10.0})
        for (double al : {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}) {
            double a = decay(delta, al);
            if (!(a > 0.0 && a < 1.0)) return false;
        }
    std::printf("  balance/diversity identities exact, decay in (0,1) on grid\n");
    return true;
}

// --- criterion 7: router contracts ------------------------------------------

bool c7() {
    ModelConfig cfg;
    cfg.d = 8;
    cfg.M = 6;
    cfg.H = 4;
    cfg.S = 2;
    cfg.P = 4;
    cfg.N = 3;
    cfg.d_conv = 2;
    cfg.L = 1;
    cfg.V = 16;
    Rng r(707);
    auto params = random_block_params(cfg, r);
    const std::size_t T = 10;
    std::vector<double> u(T * cfg.d);
    for (auto& v : u) v = r.next_normal();

    // permuting the expert score columns of W_h must not touch shared slots
    auto permuted = params;
    const std::size_t W = cfg.experts() + cfg.selected();
    for (std::size_t row = 0; row < cfg.d + cfg.M; ++row)
        for (std::size_t e = 0; e < cfg.experts(); ++e)
            permuted.router.W_h[row * W + e] =
                params.router.W_h[row * W + (cfg.experts() - 1 - e)];
    auto ca = make_cache(cfg);
    auto cb = make_cache(cfg);
    BlockTape ta, tb;
    (void)block_prefill(u, T, params, cfg, ca, &ta);
    (void)block_prefill(u, T, permuted, cfg, cb, &tb);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t h = cfg.H - cfg.S; h < cfg.H; ++h)
            for (std::size_t p = 0; p < cfg.P; ++p) {
                const std::size_t i = (t * cfg.H + h) * cfg.P + p;
                if (ta.y_slots[i] != tb.y_slots[i]) {
                    std::printf("  shared slot differs under permutation\n");
                    return false;
                }
            }

    // gamma = 0 collapses the slot delta to the baseline softplus exactly
    auto rc = cfg.router();
    rc.gamma = 0.0;
    std::vector<double> db{0.3, -0.1, 0.2, 0.0, 0.15, -0.25};
    std::vector<double> dtb{0.01, -0.02, 0.03, 0.0};
    auto sa = assemble_slots(db, {2, 0}, {9.0, -9.0}, rc, dtb);
    for (std::size_t h = 0; h < 4; ++h) {
        const double base = softplus(db[sa.filter_ids[h]] + dtb[h]);
        if (sa.delta[h] != base) return false;
    }

    // barcode rows sum to Q with distinct in-range expert ids
    ModelConfig mc = cfg;
    mc.L = 2;
    Rng mr(708);
    auto m = random_model(mc, mr);
    std::vector<std::uint32_t> ids{1, 5, 2, 9, 0, 3, 7, 7};
    auto res = model_forward(m, ids);
    for (const auto& layer : res.records)
        for (const auto& rec : layer) {
            if (rec.expert_ids.size() != mc.selected()) return false;
            auto sorted = rec.expert_ids;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                return false;
            for (auto e : rec.expert_ids)
                if (e >= mc.experts()) return false;
        }
    std::printf("  permutation, gamma-collapse, and barcode contracts hold\n");
    return true;
}

// --- criterion 8: analysis oracles ------------------------------------------

bool c8() {
    Rng r(808);
    // DFT vs naive
    for (std::size_t n : {16u, 128u, 33u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = r.next_normal();
        auto a = dft(x), b = dft_naive(x);
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(a.re[k] - b.re[k]) > 1e-9 ||
                std::abs(a.im[k] - b.im[k]) > 1e-9)
                return false;
    }
    // CKA self-similarity and rotation invariance
    const std::size_t n = 24, d = 5;
    std::vector<double> X(n * d);
    for (auto& v : X) v = r.next_normal();
    if (std::abs(linear_cka(X, n, d, X, d) - 1.0) > 1e-12) return false;
    std::vector<double> hv(d);
    double nv = 0.0;
    for (auto& x : hv) { x = r.next_normal(); nv += x * x; }
    for (auto& x : hv) x /= std::sqrt(nv);
    std::vector<double> XR(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a2 = 0; a2 < d; ++a2) {
            double proj = 0.0;
            for (std::size_t b = 0; b < d; ++b) proj += X[i * d + b] * hv[b];
            XR[i * d + a2] = X[i * d + a2] - 2.0 * proj * hv[a2];
        }
    if (std::abs(linear_cka(X, n, d, XR, d) - 1.0) > 1e-10) return false;

    // effective rank of identity
    std::vector<double> eye(49, 0.0);
    for (int i = 0; i < 7; ++i) eye[i * 7 + i] = 1.0;
    if (std::abs(effective_rank(eye, 7, 7) - 7.0) > 1e-9) return false;

    // circulant low-pass closed form
    const std::size_t T = 32;
    std::vector<double> c(T, 0.0);
    c[0] = 0.4;
    c[1] = 0.3;
    c[2] = 0.2;
    c[3] = 0.1;
    FilterMatrix fm;
    fm.T = T;
    fm.entries.assign(T * T, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t s = 0; s < T; ++s) fm.entries[t * T + s] = c[(t + T - s) % T];
    auto resp = frequency_response(fm);
    auto lam = dft(c);
    double nrm = 0.0;
    for (std::size_t k = 0; k < T; ++k) nrm += lam.magnitude(k) * lam.magnitude(k);
    nrm = std::sqrt(nrm);
    for (std::size_t k = 0; k < T; ++k)
        if (std::abs(resp[k] - lam.magnitude(k) / nrm) > 1e-8) return false;
    std::printf("  dft, cka, effective-rank, and circulant oracles hold\n");
    return true;
}

// --- criteria 9/10: desk-scale training --------------------------------------

ModelConfig desk_cfg() {
    ModelConfig c;
    c.d = 64;
    c.M = 8;
    c.H = 4;
    c.S = 2;
    c.P = 16;
    c.N = 16;
    c.d_conv = 4;
    c.L = 2;
    c.V = kByteVocab;
    // conditioning choices shared with the desk-tiny preset: a well-scaled
    // balance denominator and tied embeddings (copying benefits from an output
    // head aligned with the input symbols)
    c.epsilon = 1e-2;
    c.tie_embeddings = true;
    return c;
}

double copy_accuracy(const Model& m, std::size_t T, std::uint64_t seed,
                     std::size_t batches) {
    Rng er(seed);
    std::size_t hit = 0, tot = 0;
    for (std::size_t b = 0; b < batches; ++b) {
        std::vector<std::uint32_t> in, tg;
        copy_task(er, T, m.cfg.V, in, tg);
        auto res = model_forward(m, in);
        for (std::size_t t = copy_region_start(T); t + 1 < T; ++t) {
            const double* row = &res.logits[t * m.cfg.V];
            std::size_t arg = 0;
            for (std::size_t v = 1; v < m.cfg.V; ++v)
                if (row[v] > row[arg]) arg = v;
            hit += (arg == tg[t]) ? 1 : 0;
            tot += 1;
        }
    }
    return double(hit) / double(tot);
}

double train_copy(RouterMode mode, std::size_t steps, std::size_t T,
                  std::size_t batch) {
    auto cfg = desk_cfg();
    cfg.mode = mode;
    cfg.router_seed = 77;
    Rng r(909);
    auto m = random_model(cfg, r);
    TaskStream task = [&](std::size_t step) {
        Batch b;
        Rng tr = Rng(4242).split(step);
        for (std::size_t i = 0; i < batch; ++i) {
            std::vector<std::uint32_t> in, tg;
            copy_task(tr, T, cfg.V, in, tg);
            b.inputs.push_back(std::move(in));
            b.targets.push_back(std::move(tg));
        }
        return b;
    };
    TrainConfig tc;
    tc.steps = steps;
    tc.opt.lr = 3e-2;
    tc.opt.warmup = 200;
    tc.opt.horizon = steps;
    (void)train_loop(m, tc, task);
    return copy_accuracy(m, T, 31337, 128);
}

bool c9() {
    const std::size_t steps = 5000, T = 16, batch = 16;
    const double acc = train_copy(RouterMode::kSpectral, steps, T, batch);
    const double acc_rand = train_copy(RouterMode::kRandom, steps, T, batch);
    std::printf("  copy accuracy %.4f (spectral) vs %.4f (random routing)\n", acc,
                acc_rand);
    return acc > 0.95 && acc_rand < acc;
}

Batch passkey_batch(std::size_t step, std::size_t batch, std::size_t context) {
    Batch b;
    Rng r = Rng(24242).split(step);
    for (std::size_t i = 0; i < batch; ++i) {
        auto p = build_passkey_prompt(context, r.next_below(11) / 10.0, r);
        auto ids = p.ids;
        for (auto t : byte_tokenize(" " + p.passkey + ".")) ids.push_back(t);
        std::vector<std::uint32_t> in(ids.begin(), ids.end() - 1);
        std::vector<std::uint32_t> tg(ids.begin() + 1, ids.end());
        b.inputs.push_back(std::move(in));
        b.targets.push_back(std::move(tg));
    }
    return b;
}

bool c10() {
    auto cfg = desk_cfg();
    Rng r(910);
    auto m = random_model(cfg, r);
    // long-memory init: retrieval across hundreds of filler tokens needs
    // decays near 1 (a = exp(-softplus(dt)*exp(a_log)) ~ 0.999+); the default
    // init forgets within ~50 tokens and never discovers the key
    Rng ir(911);
    for (auto& lay : m.layers) {
        for (auto& v : lay.block.dt_bias)
            v = float(-10.0 + 5.0 * ir.next_double());
        for (auto& v : lay.block.a_log)
            v = float(std::log(1.0 + 0.5 * ir.next_double()));
    }
    const std::size_t steps = 3000, batch = 8, context = 256;
    TaskStream task = [&](std::size_t step) { return passkey_batch(step, batch, context); };
    TrainConfig tc;
    tc.steps = steps;
    tc.opt.lr = 1e-2;
    tc.opt.warmup = 200;
    tc.opt.horizon = steps;
    (void)train_loop(m, tc, task);

    PasskeySpec spec;
    spec.context_lengths = {256, 512};
    auto grid = score_passkey(m, spec, 5150);
    write_passkey_csv(grid, "acceptance_passkey.csv", "criterion 10 grid");
    bool ok256 = true;
    double sum512 = 0.0;
    std::size_t n512 = 0;
    for (const auto& cell : grid) {
        std::printf("  T=%zu depth=%.0f%% score %zu/%zu\n", cell.context_length,
                    cell.depth * 100.0, cell.score, cell.trials);
        if (cell.context_length == 256 &&
            double(cell.score) < 0.95 * double(cell.trials))
            ok256 = false;
        if (cell.context_length == 512) {
            sum512 += double(cell.score) / double(cell.trials);
            n512++;
        }
    }
    const double mean512 = sum512 / double(n512);
    std::printf("  mean retention at T=512: %.2f\n", mean512);
    return ok256 && mean512 >= 0.5;
}

// --- criterion 11: spectrum sanity -------------------------------------------

std::vector<double> constant_head_response(double a, std::size_t T) {
    HeadDiscretized h;
    h.T = T;
    h.N = 1;
    h.a.assign(T, a);
    h.delta.assign(T, 1.0);
    h.Bbar.assign(T, 1.0);
    h.C.assign(T, 1.0);
    h.D = 0.0;
    return frequency_response(materialize_matrix(h));
}

double low_band_fraction(const std::vector<double>& resp) {
    const std::size_t half = resp.size() / 2 + 1;  // one-sided
    const std::size_t low = std::max<std::size_t>(1, half / 4);
    double lo = 0.0, all = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
        const double e = resp[k] * resp[k];
        all += e;
        if (k < low) lo += e;
    }
    return lo / all;
}

bool c11() {
    const std::size_t T = 64;
    auto smooth = constant_head_response(0.99, T);
    auto sharp = constant_head_response(0.1, T);
    const double f_smooth = low_band_fraction(smooth);
    const double f_sharp = low_band_fraction(sharp);
    std::printf("  low-band energy fraction: a=0.99 -> %.3f, a=0.1 -> %.3f\n",
                f_smooth, f_sharp);
    // smooth kernel: low-pass, one-sided curve decreasing from DC
    bool monotone = true;
    for (std::size_t k = 1; k <= T / 2; ++k)
        if (smooth[k] > smooth[k - 1] + 1e-12) monotone = false;
    if (!monotone) std::printf("  smooth curve not monotone\n");
    return monotone && f_smooth > 0.8 && f_smooth > f_sharp + 0.2;
}

struct Criterion {
    int id;
    const char* name;
    bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "scan equals materialized filter matrix", c1},
    {2, "prefill/decode parity", c2},
    {3, "gradient check", c3},
    {4, "parameter arithmetic", c4},
    {5, "flops ratio", c5},
    {6, "loss identities", c6},
    {7, "router contracts", c7},
    {8, "analysis oracles", c8},
    {9, "desk-scale copy learning", c9},
    {10, "desk-scale passkey retrieval", c10},
    {11, "spectrum sanity", c11},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1 && std::strcmp(argv[1], "all") != 0) only = std::atoi(argv[1]);
    int failures = 0;
    for (const auto& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        std::printf("criterion %d: %s\n", c.id, c.name);
        const bool ok = c.fn();
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", c.id, c.name);
        if (!ok) failures++;
    }
    return failures == 0 ? 0 : 1;
}
