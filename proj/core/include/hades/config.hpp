#pragma once

#include <cstddef>
#include <cstdint>

#include "hades/router.hpp"

namespace hades {

// Full model hyperparameters. H = M = S with gamma 0 degrades every block to
// a plain Mamba2 layer (router inert).
struct ModelConfig {
    std::size_t d = 0;       // hidden dim
    std::size_t M = 0;       // total filters
    std::size_t H = 0;       // active slots per token
    std::size_t S = 0;       // shared filters
    std::size_t P = 0;       // per-slot head dim
    std::size_t N = 0;       // state dim
    std::size_t d_conv = 4;  // depthwise conv kernel
    std::size_t L = 0;       // layers
    std::size_t V = 0;       // vocab
    double gamma = 0.25;
    double lambda1 = 1e-3;
    double lambda2 = 1e-3;
    double epsilon = 1e-10;
    RouterMode mode = RouterMode::kSpectral;
    bool tie_embeddings = false;
    std::uint64_t router_seed = 0;
    // Normalizer for the position_bias mode's t/T feature; a fixed constant so
    // streaming decode matches prefill.
    double pos_norm = 2048.0;

    std::size_t experts() const { return M - S; }
    std::size_t selected() const { return H - S; }
    std::size_t conv_channels() const { return H * P + 2 * N; }
    std::size_t in_width() const { return 2 * H * P + 2 * N + M; }

    RouterConfig router() const {
        RouterConfig rc;
        rc.M = M;
        rc.S = S;
        rc.H = H;
        rc.gamma = gamma;
        rc.epsilon = epsilon;
        rc.mode = mode;
        return rc;
    }

    void validate() const;
};

}  // namespace hades
