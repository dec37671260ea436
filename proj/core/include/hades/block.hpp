#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hades/config.hpp"
#include "hades/router.hpp"
#include "hades/rng.hpp"

namespace hades {

// One HADES layer's learnable tensors.
struct BlockParams {
    std::vector<double> W_in;        // d x (2HP + 2N + M), packed [z | xBC | dt]
    std::vector<double> conv_w;      // (HP+2N) x d_conv, depthwise
    std::vector<double> conv_b;      // HP+2N
    std::vector<double> a_log;       // H
    std::vector<double> D;           // H
    std::vector<double> dt_bias;     // H
    RouterParams router;             // W_h (d+M) x (E+Q)
    std::vector<double> norm_weight; // HP
    std::vector<double> W_out;       // HP x d
};

// Streaming state for one decode stream of one block.
struct InferenceCache {
    std::vector<double> conv_state;  // (HP+2N) x d_conv, oldest first
    std::vector<double> ssm_state;   // H x N x P
    RunningMeanState mean_state;
    std::size_t t_pos = 1;           // 1-based position of the next token
    Rng router_rng{0};
};

InferenceCache make_cache(const ModelConfig& cfg);

// Saved intermediates from one prefill, enough to run the hand-written
// backward pass without recomputation.
struct BlockTape {
    std::size_t T = 0;
    std::vector<double> u;           // T x d (block input)
    std::vector<double> z;           // T x HP
    std::vector<double> xBC_proj;    // T x (HP+2N), pre-conv
    std::vector<double> xBC_conv;    // T x (HP+2N), post-conv pre-SiLU
    std::vector<double> xBC_act;     // T x (HP+2N), post-SiLU
    std::vector<double> dt_base;     // T x M
    std::vector<double> r;           // T x d (router feature)
    std::vector<double> scores;      // T x E
    std::vector<double> bias_raw;    // T x Q
    std::vector<std::size_t> filter_ids;  // T x H
    std::vector<double> slot_pre;    // T x H (pre-softplus)
    std::vector<double> slot_delta;  // T x H
    std::vector<double> slot_a;      // T x H
    std::vector<double> states;      // T x H x N x P
    std::vector<double> y_slots;     // T x H x P
    std::vector<double> gated;       // T x HP, y * silu(z)
    std::vector<double> inv_rms;     // T
};

struct BlockResult {
    std::vector<double> out;  // T x d
    double balance = 0.0;
    double diversity = 0.0;
    std::vector<SelectionRecord> records;
};

// Whole-sequence forward. Continues (and mutates) `cache`, so decode can pick
// up the stream afterwards. `tape`, when non-null, is filled for backward.
BlockResult block_prefill(const std::vector<double>& u, std::size_t T,
                          const BlockParams& params, const ModelConfig& cfg,
                          InferenceCache& cache, BlockTape* tape = nullptr);

// Single-token forward; numerically identical to the matching prefill
// position. Optionally reports the token's selection.
std::vector<double> block_decode_step(const std::vector<double>& u_t,
                                      const BlockParams& params,
                                      const ModelConfig& cfg,
                                      InferenceCache& cache,
                                      SelectionRecord* record = nullptr);

// g = y * silu(z); out = g / sqrt(mean(g^2) + 1e-6) * w
void rms_norm_gated(const std::vector<double>& y, const std::vector<double>& z,
                    const std::vector<double>& w, std::vector<double>& out);

double silu(double x);
double silu_grad(double x);

BlockParams make_block_params(const ModelConfig& cfg);             // zeros
BlockParams random_block_params(const ModelConfig& cfg, Rng& rng); // small normal init

}  // namespace hades
