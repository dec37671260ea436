#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hades/rng.hpp"

namespace hades {

enum class RouterMode {
    kSpectral,      // default: scores from [r_t || delta_base]
    kFixed,         // experts {0..Q-1} every token
    kRandom,        // seeded draw, independent of input
    kInputOnly,     // scores from [u_t || delta_base]
    kNoBias,        // spectral scoring, gamma forced to 0
    kPositionBias,  // r_t replaced by normalized position broadcast
};

RouterMode router_mode_from_string(const std::string& s);
std::string router_mode_to_string(RouterMode m);

struct RouterConfig {
    std::size_t M = 0;  // total filters
    std::size_t S = 0;  // shared filters (filter ids E..M-1)
    std::size_t H = 0;  // active slots per token
    double gamma = 0.25;
    double epsilon = 1e-10;
    RouterMode mode = RouterMode::kSpectral;

    std::size_t experts() const { return M - S; }        // E
    std::size_t selected() const { return H - S; }       // Q
    std::size_t router_width() const { return experts() + selected(); }

    void validate() const;
};

// W_h maps [r_t || delta_base] (d+M) to [scores || raw bias] (E+Q). No bias.
struct RouterParams {
    std::vector<double> W_h;  // (d+M) x (E+Q) row-major
};

struct SelectionRecord {
    std::size_t token_index = 0;
    std::vector<std::size_t> expert_ids;  // length Q, descending score
    std::vector<double> scores;           // raw s_t, length E
    std::vector<double> bias_applied;     // gamma * b per expert slot, length Q
    std::vector<std::size_t> shared_ids;  // {E..M-1}
};

struct RunningMeanState {
    std::vector<double> cumsum;
    std::size_t count = 0;
};

// Inclusive running-mean residual: accumulates u first, then subtracts the
// mean; the first token always yields r = 0. Same convention in prefill and
// decode so the two paths agree exactly.
void spectral_residual(const std::vector<double>& u, RunningMeanState& state,
                       std::vector<double>& r);

// hb = [r_t || delta_base] . W_h; first E outputs are scores, the rest raw bias.
void score_and_bias(const std::vector<double>& delta_base,
                    const std::vector<double>& r, const RouterParams& params,
                    std::size_t d, const RouterConfig& cfg,
                    std::vector<double>& scores, std::vector<double>& bias_raw);

// Ids of the Q largest scores, descending; ties break toward the lower index.
std::vector<std::size_t> top_q(const std::vector<double>& scores, std::size_t Q);

// Per-slot delta: slots are [selected experts (descending score) || shared
// ids ascending]; Softplus(gathered + dt_bias + gamma * bias), bias zero on
// the shared tail. Also returns the slot -> filter id map and the pre-softplus
// accumulations (needed by the backward pass and delta-shift analysis).
struct SlotAssembly {
    std::vector<std::size_t> filter_ids;   // length H
    std::vector<double> pre_activation;    // gathered + dt_bias + gamma*bias
    std::vector<double> delta;             // Softplus of the above
    std::vector<double> bias_applied;      // gamma*b on expert slots, 0 on shared
};

SlotAssembly assemble_slots(const std::vector<double>& delta_base,
                            const std::vector<std::size_t>& expert_ids,
                            const std::vector<double>& bias_raw,
                            const RouterConfig& cfg,
                            const std::vector<double>& dt_bias);

// Mean over tokens of Var(s_t) / (mean(s_t)^2 + eps), population variance.
// scores is tokens x E row-major.
double balance_loss(const std::vector<double>& scores, std::size_t tokens,
                    std::size_t E, double epsilon);

// Mean over tokens of mean_{i,j} (<yhat_i, yhat_j> - delta_ij)^2 with rows
// l2-normalized (zero rows stay zero). y is tokens x H x P row-major.
double diversity_loss(const std::vector<double>& y, std::size_t tokens,
                      std::size_t H, std::size_t P);

void write_selection_csv(const std::vector<SelectionRecord>& records,
                         const std::string& path, const std::string& header_note);

}  // namespace hades
