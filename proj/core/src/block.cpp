#include "hades/block.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "hades/ssm.hpp"
#include "hades/tensor.hpp"

namespace hades {

namespace {

double to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

// Draw Q distinct ids from [0, E) by partial Fisher-Yates.
std::vector<std::size_t> random_ids(Rng& rng, std::size_t E, std::size_t Q) {
    std::vector<std::size_t> pool(E);
    for (std::size_t i = 0; i < E; ++i) pool[i] = i;
    std::vector<std::size_t> out(Q);
    for (std::size_t k = 0; k < Q; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.next_below(E - k));
        std::swap(pool[k], pool[j]);
        out[k] = pool[k];
    }
    return out;
}

}  // namespace

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

void rms_norm_gated(const std::vector<double>& y, const std::vector<double>& z,
                    const std::vector<double>& w, std::vector<double>& out) {
    const std::size_t n = y.size();
    if (z.size() != n || w.size() != n || n == 0)
        throw std::invalid_argument("rms_norm_gated: shape mismatch");
    out.resize(n);
    double ms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = y[i] * silu(z[i]);
        ms += out[i] * out[i];
    }
    const double inv = 1.0 / std::sqrt(ms / static_cast<double>(n) + 1e-6);
    for (std::size_t i = 0; i < n; ++i) out[i] = out[i] * inv * w[i];
}

InferenceCache make_cache(const ModelConfig& cfg) {
    InferenceCache c;
    c.conv_state.assign(cfg.conv_channels() * cfg.d_conv, 0.0);
    c.ssm_state.assign(cfg.H * cfg.N * cfg.P, 0.0);
    c.mean_state.cumsum.assign(cfg.d, 0.0);
    c.mean_state.count = 0;
    c.t_pos = 1;
    c.router_rng = Rng(cfg.router_seed);
    return c;
}

BlockParams make_block_params(const ModelConfig& cfg) {
    BlockParams p;
    p.W_in.assign(cfg.d * cfg.in_width(), 0.0);
    p.conv_w.assign(cfg.conv_channels() * cfg.d_conv, 0.0);
    p.conv_b.assign(cfg.conv_channels(), 0.0);
    p.a_log.assign(cfg.H, 0.0);
    p.D.assign(cfg.H, 0.0);
    p.dt_bias.assign(cfg.H, 0.0);
    p.router.W_h.assign((cfg.d + cfg.M) * (cfg.experts() + cfg.selected()), 0.0);
    p.norm_weight.assign(cfg.H * cfg.P, 0.0);
    p.W_out.assign(cfg.H * cfg.P * cfg.d, 0.0);
    return p;
}

BlockParams random_block_params(const ModelConfig& cfg, Rng& rng) {
    BlockParams p = make_block_params(cfg);
    const double win_scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    for (auto& v : p.W_in) v = to_float(rng.next_normal() * win_scale);
    for (auto& v : p.conv_w) v = to_float(rng.next_normal() / std::sqrt((double)cfg.d_conv));
    for (auto& v : p.conv_b) v = to_float(rng.next_normal() * 0.02);
    // a in roughly (0.4, 0.95) for moderate deltas; delta init near [0.02, 0.7]
    for (auto& v : p.a_log) v = to_float(std::log(1.0 + 7.0 * rng.next_double()));
    for (auto& v : p.D) v = 1.0;
    for (auto& v : p.dt_bias) v = to_float(-4.0 + 4.0 * rng.next_double());
    const double wh_scale = 1.0 / std::sqrt(static_cast<double>(cfg.d + cfg.M));
    for (auto& v : p.router.W_h) v = to_float(rng.next_normal() * wh_scale);
    for (auto& v : p.norm_weight) v = 1.0;
    const double wout_scale = 1.0 / std::sqrt(static_cast<double>(cfg.H * cfg.P));
    for (auto& v : p.W_out) v = to_float(rng.next_normal() * wout_scale);
    return p;
}

namespace {

// Shared per-token step; prefill loops this so decode is the same code path
// by construction.
void token_step(const double* u_t, const BlockParams& params,
                const ModelConfig& cfg, InferenceCache& cache,
                double* out_t, SelectionRecord* record,
                std::vector<double>* scores_out, std::vector<double>* y_slots_out,
                BlockTape* tape, std::size_t tape_t) {
    const std::size_t d = cfg.d, HP = cfg.H * cfg.P, N = cfg.N, M = cfg.M;
    const std::size_t CC = cfg.conv_channels();  // HP + 2N
    const std::size_t W = cfg.in_width();
    const std::size_t E = cfg.experts(), Q = cfg.selected();
    const std::size_t dc = cfg.d_conv;

    // 1. packed projection [z | xBC | dt]
    std::vector<double> zxbcdt(W);
    matvec_rowmajor(u_t, params.W_in.data(), zxbcdt.data(), d, W);
    check_finite(zxbcdt, "in_proj output");
    const double* z = zxbcdt.data();
    const double* xBC_proj = zxbcdt.data() + HP;
    const double* dt_base = zxbcdt.data() + HP + CC;

    // 2. depthwise causal conv via ring buffer (oldest-first) + SiLU
    std::vector<double> xBC(CC);
    for (std::size_t c = 0; c < CC; ++c) {
        double* ring = &cache.conv_state[c * dc];
        std::memmove(ring, ring + 1, (dc - 1) * sizeof(double));
        ring[dc - 1] = xBC_proj[c];
        double acc = params.conv_b[c];
        const double* k = &params.conv_w[c * dc];
        for (std::size_t j = 0; j < dc; ++j) acc += k[j] * ring[j];
        xBC[c] = acc;
    }
    if (tape) {
        std::copy(xBC_proj, xBC_proj + CC, tape->xBC_proj.begin() + tape_t * CC);
        std::copy(xBC.begin(), xBC.end(), tape->xBC_conv.begin() + tape_t * CC);
    }
    for (auto& v : xBC) v = silu(v);
    check_finite(xBC, "conv output");
    const double* x = xBC.data();
    const double* Bbar = xBC.data() + HP;
    const double* C = xBC.data() + HP + N;

    // 3. router feature
    std::vector<double> u_vec(u_t, u_t + d);
    std::vector<double> r(d, 0.0);
    {
        std::vector<double> r_mean;
        spectral_residual(u_vec, cache.mean_state, r_mean);
        switch (cfg.mode) {
            case RouterMode::kInputOnly:
                r = u_vec;
                break;
            case RouterMode::kPositionBias: {
                const double p = static_cast<double>(cache.t_pos) / cfg.pos_norm;
                r.assign(d, p);
                break;
            }
            default:
                r = r_mean;
        }
    }

    // 4. scores, selection, slot deltas
    std::vector<double> dt_vec(dt_base, dt_base + M);
    std::vector<double> scores, bias_raw;
    const RouterConfig rc = cfg.router();
    score_and_bias(dt_vec, r, params.router, d, rc, scores, bias_raw);
    std::vector<std::size_t> ids;
    if (cfg.mode == RouterMode::kFixed) {
        ids.resize(Q);
        for (std::size_t k = 0; k < Q; ++k) ids[k] = k;
    } else if (cfg.mode == RouterMode::kRandom) {
        ids = E > 0 ? random_ids(cache.router_rng, E, Q) : std::vector<std::size_t>{};
    } else {
        ids = top_q(scores, Q);
    }
    SlotAssembly slots = assemble_slots(dt_vec, ids, bias_raw, rc, params.dt_bias);
    check_finite(slots.delta, "slot delta");

    // 5. per-slot scan step
    std::vector<double> y_cat(HP, 0.0);
    for (std::size_t h = 0; h < cfg.H; ++h) {
        const double delta = slots.delta[h];
        const double a = decay(delta, params.a_log[h]);
        const double* xh = x + h * cfg.P;
        double* state = &cache.ssm_state[h * N * cfg.P];
        for (std::size_t n = 0; n < N; ++n) {
            const double w = delta * Bbar[n];
            double* sn = state + n * cfg.P;
            for (std::size_t p = 0; p < cfg.P; ++p) sn[p] = a * sn[p] + w * xh[p];
        }
        double* yh = &y_cat[h * cfg.P];
        for (std::size_t n = 0; n < N; ++n) {
            const double c = C[n];
            const double* sn = state + n * cfg.P;
            for (std::size_t p = 0; p < cfg.P; ++p) yh[p] += c * sn[p];
        }
        for (std::size_t p = 0; p < cfg.P; ++p) yh[p] += params.D[h] * xh[p];
        if (tape) {
            std::copy(state, state + N * cfg.P,
                      tape->states.begin() + (tape_t * cfg.H + h) * N * cfg.P);
            tape->slot_a[tape_t * cfg.H + h] = a;
        }
    }
    check_finite(y_cat, "scan output");

    // 6. gate, norm, out-projection
    std::vector<double> gated(HP);
    double ms = 0.0;
    for (std::size_t i = 0; i < HP; ++i) {
        gated[i] = y_cat[i] * silu(z[i]);
        ms += gated[i] * gated[i];
    }
    const double inv = 1.0 / std::sqrt(ms / static_cast<double>(HP) + 1e-6);
    std::vector<double> normed(HP);
    for (std::size_t i = 0; i < HP; ++i) normed[i] = gated[i] * inv * params.norm_weight[i];
    matvec_rowmajor(normed.data(), params.W_out.data(), out_t, HP, d);
    check_finite(std::vector<double>(out_t, out_t + d), "block output");

    if (record) {
        record->token_index = cache.t_pos - 1;
        record->expert_ids = ids;
        record->scores = scores;
        record->bias_applied.assign(slots.bias_applied.begin(), slots.bias_applied.begin() + Q);
        record->shared_ids.resize(cfg.S);
        for (std::size_t k = 0; k < cfg.S; ++k) record->shared_ids[k] = E + k;
    }
    if (scores_out) *scores_out = scores;
    if (y_slots_out) *y_slots_out = y_cat;

    if (tape) {
        std::copy(z, z + HP, tape->z.begin() + tape_t * HP);
        std::copy(xBC.begin(), xBC.end(), tape->xBC_act.begin() + tape_t * CC);
        std::copy(dt_vec.begin(), dt_vec.end(), tape->dt_base.begin() + tape_t * M);
        std::copy(r.begin(), r.end(), tape->r.begin() + tape_t * d);
        std::copy(scores.begin(), scores.end(), tape->scores.begin() + tape_t * E);
        std::copy(bias_raw.begin(), bias_raw.end(), tape->bias_raw.begin() + tape_t * Q);
        std::copy(slots.filter_ids.begin(), slots.filter_ids.end(),
                  tape->filter_ids.begin() + tape_t * cfg.H);
        std::copy(slots.pre_activation.begin(), slots.pre_activation.end(),
                  tape->slot_pre.begin() + tape_t * cfg.H);
        std::copy(slots.delta.begin(), slots.delta.end(),
                  tape->slot_delta.begin() + tape_t * cfg.H);
        std::copy(y_cat.begin(), y_cat.end(), tape->y_slots.begin() + tape_t * HP);
        std::copy(gated.begin(), gated.end(), tape->gated.begin() + tape_t * HP);
        tape->inv_rms[tape_t] = inv;
        std::copy(u_t, u_t + d, tape->u.begin() + tape_t * d);
    }

    cache.t_pos += 1;
}

}  // namespace

BlockResult block_prefill(const std::vector<double>& u, std::size_t T,
                          const BlockParams& params, const ModelConfig& cfg,
                          InferenceCache& cache, BlockTape* tape) {
    if (T == 0) throw std::invalid_argument("block_prefill: T == 0");
    if (u.size() != T * cfg.d) throw std::invalid_argument("block_prefill: u shape mismatch");
    const std::size_t E = cfg.experts(), HP = cfg.H * cfg.P;

    if (tape) {
        const std::size_t CC = cfg.conv_channels();
        tape->T = T;
        tape->u.assign(T * cfg.d, 0.0);
        tape->z.assign(T * HP, 0.0);
        tape->xBC_proj.assign(T * CC, 0.0);
        tape->xBC_conv.assign(T * CC, 0.0);
        tape->xBC_act.assign(T * CC, 0.0);
        tape->dt_base.assign(T * cfg.M, 0.0);
        tape->r.assign(T * cfg.d, 0.0);
        tape->scores.assign(T * E, 0.0);
        tape->bias_raw.assign(T * cfg.selected(), 0.0);
        tape->filter_ids.assign(T * cfg.H, 0);
        tape->slot_pre.assign(T * cfg.H, 0.0);
        tape->slot_delta.assign(T * cfg.H, 0.0);
        tape->slot_a.assign(T * cfg.H, 0.0);
        tape->states.assign(T * cfg.H * cfg.N * cfg.P, 0.0);
        tape->y_slots.assign(T * HP, 0.0);
        tape->gated.assign(T * HP, 0.0);
        tape->inv_rms.assign(T, 0.0);
    }

    BlockResult res;
    res.out.assign(T * cfg.d, 0.0);
    res.records.resize(T);
    std::vector<double> all_scores(T * E, 0.0);
    std::vector<double> all_y(T * HP, 0.0);
    std::vector<double> scores_t, y_t;
    for (std::size_t t = 0; t < T; ++t) {
        token_step(&u[t * cfg.d], params, cfg, cache, &res.out[t * cfg.d],
                   &res.records[t], &scores_t, &y_t, tape, t);
        std::copy(scores_t.begin(), scores_t.end(), all_scores.begin() + t * E);
        std::copy(y_t.begin(), y_t.end(), all_y.begin() + t * HP);
    }
    res.balance = balance_loss(all_scores, T, E, cfg.epsilon);
    res.diversity = diversity_loss(all_y, T, cfg.H, cfg.P);
    return res;
}

std::vector<double> block_decode_step(const std::vector<double>& u_t,
                                      const BlockParams& params,
                                      const ModelConfig& cfg,
                                      InferenceCache& cache,
                                      SelectionRecord* record) {
    if (u_t.size() != cfg.d) throw std::invalid_argument("block_decode_step: shape mismatch");
    if (cache.ssm_state.size() != cfg.H * cfg.N * cfg.P)
        throw std::invalid_argument("block_decode_step: cache shape mismatch");
    std::vector<double> out(cfg.d, 0.0);
    token_step(u_t.data(), params, cfg, cache, out.data(), record, nullptr, nullptr,
               nullptr, 0);
    return out;
}

}  // namespace hades
