#include "hades/router.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "hades/ssm.hpp"
#include "hades/tensor.hpp"

namespace hades {

RouterMode router_mode_from_string(const std::string& s) {
    if (s == "spectral") return RouterMode::kSpectral;
    if (s == "fixed") return RouterMode::kFixed;
    if (s == "random") return RouterMode::kRandom;
    if (s == "input_only") return RouterMode::kInputOnly;
    if (s == "no_bias") return RouterMode::kNoBias;
    if (s == "position_bias") return RouterMode::kPositionBias;
    throw std::invalid_argument("unknown router mode: " + s);
}

std::string router_mode_to_string(RouterMode m) {
    switch (m) {
        case RouterMode::kSpectral: return "spectral";
        case RouterMode::kFixed: return "fixed";
        case RouterMode::kRandom: return "random";
        case RouterMode::kInputOnly: return "input_only";
        case RouterMode::kNoBias: return "no_bias";
        case RouterMode::kPositionBias: return "position_bias";
    }
    return "spectral";
}

void RouterConfig::validate() const {
    if (S > H || H > M) throw std::invalid_argument("RouterConfig: need S <= H <= M");
    if (selected() > experts()) throw std::invalid_argument("RouterConfig: Q > E");
    if (gamma < 0.0) throw std::invalid_argument("RouterConfig: gamma < 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("RouterConfig: epsilon <= 0");
}

void spectral_residual(const std::vector<double>& u, RunningMeanState& state,
                       std::vector<double>& r) {
    const std::size_t d = u.size();
    if (state.cumsum.empty()) state.cumsum.assign(d, 0.0);
    if (state.cumsum.size() != d) throw std::invalid_argument("spectral_residual: dim mismatch");
    for (std::size_t i = 0; i < d; ++i) state.cumsum[i] += u[i];
    state.count += 1;
    const double inv = 1.0 / static_cast<double>(state.count);
    r.resize(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = u[i] - state.cumsum[i] * inv;
}

void score_and_bias(const std::vector<double>& delta_base,
                    const std::vector<double>& r, const RouterParams& params,
                    std::size_t d, const RouterConfig& cfg,
                    std::vector<double>& scores, std::vector<double>& bias_raw) {
    const std::size_t M = cfg.M, E = cfg.experts(), Q = cfg.selected();
    const std::size_t width = E + Q;
    if (delta_base.size() != M || r.size() != d)
        throw std::invalid_argument("score_and_bias: shape mismatch");
    if (params.W_h.size() != (d + M) * width)
        throw std::invalid_argument("score_and_bias: W_h shape mismatch");
    scores.assign(E, 0.0);
    bias_raw.assign(Q, 0.0);
    if (width == 0) return;
    std::vector<double> hb(width, 0.0);
    // input order: residual first, then delta_base
    for (std::size_t i = 0; i < d; ++i) {
        const double v = r[i];
        if (v == 0.0) continue;
        const double* row = &params.W_h[i * width];
        for (std::size_t j = 0; j < width; ++j) hb[j] += v * row[j];
    }
    for (std::size_t i = 0; i < M; ++i) {
        const double v = delta_base[i];
        if (v == 0.0) continue;
        const double* row = &params.W_h[(d + i) * width];
        for (std::size_t j = 0; j < width; ++j) hb[j] += v * row[j];
    }
    for (std::size_t j = 0; j < E; ++j) scores[j] = hb[j];
    for (std::size_t j = 0; j < Q; ++j) bias_raw[j] = hb[E + j];
}

std::vector<std::size_t> top_q(const std::vector<double>& scores, std::size_t Q) {
    const std::size_t E = scores.size();
    if (Q > E) throw std::invalid_argument("top_q: Q > E");
    std::vector<std::size_t> idx(E);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    idx.resize(Q);
    return idx;
}

SlotAssembly assemble_slots(const std::vector<double>& delta_base,
                            const std::vector<std::size_t>& expert_ids,
                            const std::vector<double>& bias_raw,
                            const RouterConfig& cfg,
                            const std::vector<double>& dt_bias) {
    const std::size_t H = cfg.H, S = cfg.S, E = cfg.experts(), Q = cfg.selected();
    if (expert_ids.size() != Q || bias_raw.size() != Q || dt_bias.size() != H)
        throw std::invalid_argument("assemble_slots: shape mismatch");
    const double gamma = (cfg.mode == RouterMode::kNoBias) ? 0.0 : cfg.gamma;
    SlotAssembly out;
    out.filter_ids.resize(H);
    out.pre_activation.resize(H);
    out.delta.resize(H);
    out.bias_applied.assign(H, 0.0);
    for (std::size_t k = 0; k < Q; ++k) {
        const std::size_t id = expert_ids[k];
        if (id >= E) throw std::invalid_argument("assemble_slots: expert id out of range");
        out.filter_ids[k] = id;
        out.bias_applied[k] = gamma * bias_raw[k];
    }
    for (std::size_t k = 0; k < S; ++k) out.filter_ids[Q + k] = E + k;
    for (std::size_t h = 0; h < H; ++h) {
        const double pre = delta_base[out.filter_ids[h]] + dt_bias[h] + out.bias_applied[h];
        out.pre_activation[h] = pre;
        out.delta[h] = softplus(pre);
    }
    return out;
}

double balance_loss(const std::vector<double>& scores, std::size_t tokens,
                    std::size_t E, double epsilon) {
    if (tokens == 0) throw std::invalid_argument("balance_loss: empty");
    if (E == 0) return 0.0;
    if (scores.size() != tokens * E) throw std::invalid_argument("balance_loss: shape mismatch");
    double total = 0.0;
    for (std::size_t t = 0; t < tokens; ++t) {
        const double* s = &scores[t * E];
        double mean = 0.0;
        for (std::size_t j = 0; j < E; ++j) mean += s[j];
        mean /= static_cast<double>(E);
        double var = 0.0;
        for (std::size_t j = 0; j < E; ++j) var += (s[j] - mean) * (s[j] - mean);
        var /= static_cast<double>(E);
        total += var / (mean * mean + epsilon);
    }
    return total / static_cast<double>(tokens);
}

double diversity_loss(const std::vector<double>& y, std::size_t tokens,
                      std::size_t H, std::size_t P) {
    if (H == 0) throw std::invalid_argument("diversity_loss: H == 0");
    if (y.size() != tokens * H * P) throw std::invalid_argument("diversity_loss: shape mismatch");
    double total = 0.0;
    std::vector<double> yhat(H * P);
    for (std::size_t t = 0; t < tokens; ++t) {
        const double* yt = &y[t * H * P];
        for (std::size_t i = 0; i < H; ++i) {
            double nrm = 0.0;
            for (std::size_t p = 0; p < P; ++p) nrm += yt[i * P + p] * yt[i * P + p];
            nrm = std::sqrt(nrm);
            const double inv = (nrm > 0.0) ? 1.0 / nrm : 0.0;
            for (std::size_t p = 0; p < P; ++p) yhat[i * P + p] = yt[i * P + p] * inv;
        }
        double loss_t = 0.0;
        for (std::size_t i = 0; i < H; ++i) {
            for (std::size_t j = 0; j < H; ++j) {
                double g = 0.0;
                for (std::size_t p = 0; p < P; ++p) g += yhat[i * P + p] * yhat[j * P + p];
                const double target = (i == j) ? 1.0 : 0.0;
                loss_t += (g - target) * (g - target);
            }
        }
        total += loss_t / static_cast<double>(H * H);
    }
    return total / static_cast<double>(tokens);
}

void write_selection_csv(const std::vector<SelectionRecord>& records,
                         const std::string& path, const std::string& header_note) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << "\n";
    f << "token_index,rank,expert_id,score,bias\n";
    for (const auto& rec : records) {
        for (std::size_t k = 0; k < rec.expert_ids.size(); ++k) {
            f << rec.token_index << ',' << k << ',' << rec.expert_ids[k] << ','
              << rec.scores[rec.expert_ids[k]] << ',' << rec.bias_applied[k] << "\n";
        }
    }
}

}  // namespace hades
