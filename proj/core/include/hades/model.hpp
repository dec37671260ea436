#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hades/block.hpp"
#include "hades/config.hpp"

namespace hades {

struct LayerParams {
    std::vector<double> norm_w;  // d, pre-norm weight
    BlockParams block;
};

struct Model {
    ModelConfig cfg;
    std::vector<double> embed_in;   // V x d
    std::vector<LayerParams> layers;
    std::vector<double> final_norm; // d
    std::vector<double> embed_out;  // d x V (unused when tie_embeddings)
};

Model make_model(const ModelConfig& cfg);               // zero parameters
Model random_model(const ModelConfig& cfg, Rng& rng);   // float-quantized init

// Enumerates every parameter tensor as (name, data, shape), in a fixed order
// shared by the optimizer, checkpoints, and gradient checks.
template <class ModelT, class F>
void visit_params(ModelT& m, F&& f) {
    const auto& c = m.cfg;
    f("embed_in", m.embed_in, std::vector<std::size_t>{c.V, c.d});
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto& lay = m.layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        f(p + "norm_w", lay.norm_w, std::vector<std::size_t>{c.d});
        f(p + "W_in", lay.block.W_in, std::vector<std::size_t>{c.d, c.in_width()});
        f(p + "conv_w", lay.block.conv_w, std::vector<std::size_t>{c.conv_channels(), c.d_conv});
        f(p + "conv_b", lay.block.conv_b, std::vector<std::size_t>{c.conv_channels()});
        f(p + "a_log", lay.block.a_log, std::vector<std::size_t>{c.H});
        f(p + "D", lay.block.D, std::vector<std::size_t>{c.H});
        f(p + "dt_bias", lay.block.dt_bias, std::vector<std::size_t>{c.H});
        f(p + "W_h", lay.block.router.W_h,
          std::vector<std::size_t>{c.d + c.M, c.experts() + c.selected()});
        f(p + "norm_weight", lay.block.norm_weight, std::vector<std::size_t>{c.H * c.P});
        f(p + "W_out", lay.block.W_out, std::vector<std::size_t>{c.H * c.P, c.d});
    }
    f("final_norm", m.final_norm, std::vector<std::size_t>{c.d});
    if (!c.tie_embeddings) {
        f("embed_out", m.embed_out, std::vector<std::size_t>{c.d, c.V});
    }
}

std::size_t total_param_count(const Model& m);

// Saved intermediates of model_forward for one sequence.
struct ModelTape {
    std::size_t T = 0;
    std::vector<std::uint32_t> ids;
    std::vector<std::vector<double>> layer_inputs;  // L+1 entries of T x d (residual stream)
    std::vector<std::vector<double>> normed_inputs; // L entries of T x d
    std::vector<BlockTape> blocks;                  // L
    std::vector<double> final_in;                   // T x d (pre final norm)
    std::vector<double> final_normed;               // T x d
    std::vector<double> logits;                     // T x V
};

struct ForwardResult {
    std::vector<double> logits;  // T x V
    double balance = 0.0;        // mean over layers
    double diversity = 0.0;      // mean over layers
    std::vector<std::vector<SelectionRecord>> records;  // per layer
};

// Whole-sequence forward for one sequence of token ids. `caches`, when
// non-null, receives the per-layer streaming state for continued decode.
ForwardResult model_forward(const Model& m, const std::vector<std::uint32_t>& ids,
                            std::vector<InferenceCache>* caches = nullptr,
                            ModelTape* tape = nullptr);

// RMS norm with learned weight (eps 1e-6).
void rms_norm(const std::vector<double>& x, const std::vector<double>& w,
              std::vector<double>& out);

struct DecodeState {
    std::vector<InferenceCache> caches;  // one per layer
};

DecodeState make_decode_state(const Model& m);

// Single-token decode; numerically identical to the matching prefill position.
std::vector<double> model_decode_step(const Model& m, std::uint32_t id,
                                      DecodeState& state,
                                      std::vector<SelectionRecord>* records = nullptr);

// Greedy argmax sampling for `steps` tokens after feeding `prompt`.
std::vector<std::uint32_t> greedy_generate(const Model& m,
                                           const std::vector<std::uint32_t>& prompt,
                                           std::size_t steps);

}  // namespace hades
