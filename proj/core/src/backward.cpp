#include <cmath>
#include <stdexcept>
#include <vector>

#include "hades/model.hpp"
#include "hades/ssm.hpp"
#include "hades/tensor.hpp"
#include "hades/trainer.hpp"

// Hand-derived adjoints for every forward operation. Each section mirrors the
// corresponding step in block.cpp's token_step / model.cpp's model_forward.

namespace hades {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out_i = x_i * inv * w_i with inv = 1/sqrt(mean(x^2) + 1e-6).
void rms_backward(const double* x, const double* w, const double* dout,
                  double* dx_add, double* dw_add, std::size_t n) {
    double ms = 0.0;
    for (std::size_t i = 0; i < n; ++i) ms += x[i] * x[i];
    const double inv = 1.0 / std::sqrt(ms / static_cast<double>(n) + 1e-6);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dout[i] * w[i] * x[i];
    const double k = inv * inv * inv * s / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx_add[i] += dout[i] * w[i] * inv - x[i] * k;
        dw_add[i] += dout[i] * x[i] * inv;
    }
}

// d(mean_t CV^2) scaled by coeff, added into dscores (T x E).
void balance_backward(const std::vector<double>& scores, std::size_t T,
                      std::size_t E, double epsilon, double coeff,
                      std::vector<double>& dscores) {
    if (E == 0) return;
    const double f = coeff / static_cast<double>(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double* s = &scores[t * E];
        double mean = 0.0;
        for (std::size_t j = 0; j < E; ++j) mean += s[j];
        mean /= static_cast<double>(E);
        double var = 0.0;
        for (std::size_t j = 0; j < E; ++j) var += (s[j] - mean) * (s[j] - mean);
        var /= static_cast<double>(E);
        const double denom = mean * mean + epsilon;
        for (std::size_t j = 0; j < E; ++j) {
            const double dvar = 2.0 * (s[j] - mean) / static_cast<double>(E);
            const double ddenom = 2.0 * mean / static_cast<double>(E);
            dscores[t * E + j] += f * (dvar / denom - var * ddenom / (denom * denom));
        }
    }
}

// d(mean_t mean_ij (G_ij - I)^2) scaled by coeff, added into dy (T x H x P).
void diversity_backward(const std::vector<double>& y, std::size_t T,
                        std::size_t H, std::size_t P, double coeff,
                        std::vector<double>& dy) {
    std::vector<double> yhat(H * P), inv(H), G(H * H), dyhat(H * P);
    const double f = coeff / static_cast<double>(T * H * H);
    for (std::size_t t = 0; t < T; ++t) {
        const double* yt = &y[t * H * P];
        for (std::size_t i = 0; i < H; ++i) {
            double nrm = 0.0;
            for (std::size_t p = 0; p < P; ++p) nrm += yt[i * P + p] * yt[i * P + p];
            nrm = std::sqrt(nrm);
            inv[i] = (nrm > 0.0) ? 1.0 / nrm : 0.0;
            for (std::size_t p = 0; p < P; ++p) yhat[i * P + p] = yt[i * P + p] * inv[i];
        }
        for (std::size_t i = 0; i < H; ++i)
            for (std::size_t j = 0; j < H; ++j) {
                double g = 0.0;
                for (std::size_t p = 0; p < P; ++p) g += yhat[i * P + p] * yhat[j * P + p];
                G[i * H + j] = g;
            }
        // dL/dyhat_i = 4 f sum_j (G_ij - delta_ij) yhat_j (G symmetric)
        for (std::size_t i = 0; i < H; ++i) {
            for (std::size_t p = 0; p < P; ++p) {
                double v = 0.0;
                for (std::size_t j = 0; j < H; ++j) {
                    const double e = G[i * H + j] - ((i == j) ? 1.0 : 0.0);
                    v += e * yhat[j * P + p];
                }
                dyhat[i * P + p] = 4.0 * f * v;
            }
        }
        // through yhat = y / ||y||; zero rows get zero gradient
        for (std::size_t i = 0; i < H; ++i) {
            if (inv[i] == 0.0) continue;
            double dotv = 0.0;
            for (std::size_t p = 0; p < P; ++p) dotv += yhat[i * P + p] * dyhat[i * P + p];
            for (std::size_t p = 0; p < P; ++p)
                dy[t * H * P + i * P + p] +=
                    inv[i] * (dyhat[i * P + p] - yhat[i * P + p] * dotv);
        }
    }
}

// Backward of r_t = u_t - (1/t) sum_{s<=t} u_s (1-based t): for each channel,
// du_s = dr_s - sum_{t>=s} dr_t / t.
void spectral_residual_backward(const std::vector<double>& dr, std::size_t T,
                                std::size_t d, std::vector<double>& du) {
    std::vector<double> acc(d, 0.0);
    for (std::size_t s = T; s-- > 0;) {
        const double invt = 1.0 / static_cast<double>(s + 1);
        for (std::size_t j = 0; j < d; ++j) {
            acc[j] += dr[s * d + j] * invt;
            du[s * d + j] += dr[s * d + j] - acc[j];
        }
    }
}

struct BlockGrads {
    std::vector<double>& W_in;
    std::vector<double>& conv_w;
    std::vector<double>& conv_b;
    std::vector<double>& a_log;
    std::vector<double>& D;
    std::vector<double>& dt_bias;
    std::vector<double>& W_h;
    std::vector<double>& norm_weight;
    std::vector<double>& W_out;
};

// Reverse pass over one block prefill. `dout` is T x d wrt the block output;
// c1/c2 weight the per-layer balance/diversity losses. Returns d(input).
std::vector<double> block_backward(const BlockParams& p, const ModelConfig& cfg,
                                   const BlockTape& tp,
                                   const std::vector<double>& dout,
                                   double c1, double c2, BlockGrads g) {
    const std::size_t T = tp.T, d = cfg.d, HPn = cfg.H * cfg.P;
    const std::size_t N = cfg.N, M = cfg.M, CC = cfg.conv_channels();
    const std::size_t W = cfg.in_width(), E = cfg.experts(), Q = cfg.selected();
    const std::size_t dc = cfg.d_conv, Hh = cfg.H, P = cfg.P;
    const double gamma_eff = (cfg.mode == RouterMode::kNoBias) ? 0.0 : cfg.gamma;

    std::vector<double> dscores(T * E, 0.0);
    std::vector<double> dy(T * HPn, 0.0);
    std::vector<double> dz(T * HPn, 0.0);
    std::vector<double> dxBC_act(T * CC, 0.0);
    std::vector<double> ddt_base(T * M, 0.0);
    std::vector<double> dbias_raw(T * Q, 0.0);
    std::vector<double> dr(T * d, 0.0);
    std::vector<double> du(T * d, 0.0);

    balance_backward(tp.scores, T, E, cfg.epsilon, c1, dscores);
    diversity_backward(tp.y_slots, T, Hh, P, c2, dy);

    // 6. out-projection and gated RMS norm
    std::vector<double> dnormed(HPn), normed(HPn), dgated(HPn);
    for (std::size_t t = 0; t < T; ++t) {
        const double inv = tp.inv_rms[t];
        const double* gated = &tp.gated[t * HPn];
        const double* dot = &dout[t * d];
        for (std::size_t i = 0; i < HPn; ++i) {
            normed[i] = gated[i] * inv * p.norm_weight[i];
            double v = 0.0;
            const double* row = &p.W_out[i * d];
            for (std::size_t j = 0; j < d; ++j) v += row[j] * dot[j];
            dnormed[i] = v;
        }
        for (std::size_t i = 0; i < HPn; ++i) {
            double* grow = &g.W_out[i * d];
            const double ni = normed[i];
            for (std::size_t j = 0; j < d; ++j) grow[j] += ni * dot[j];
            g.norm_weight[i] += dnormed[i] * gated[i] * inv;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < HPn; ++i) s += dnormed[i] * p.norm_weight[i] * gated[i];
        const double k = inv * inv * inv * s / static_cast<double>(HPn);
        const double* zr = &tp.z[t * HPn];
        const double* yr = &tp.y_slots[t * HPn];
        for (std::size_t i = 0; i < HPn; ++i) {
            dgated[i] = dnormed[i] * p.norm_weight[i] * inv - gated[i] * k;
            dy[t * HPn + i] += dgated[i] * silu(zr[i]);
            dz[t * HPn + i] = dgated[i] * yr[i] * silu_grad(zr[i]);
        }
    }

    // 5. scan BPTT per slot
    std::vector<double> dh(N * P);
    for (std::size_t h = 0; h < Hh; ++h) {
        const double A = std::exp(p.a_log[h]);
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t t = T; t-- > 0;) {
            const double* xt = &tp.xBC_act[t * CC + h * P];
            const double* Bt = &tp.xBC_act[t * CC + HPn];
            const double* Ct = &tp.xBC_act[t * CC + HPn + N];
            const double* st = &tp.states[(t * Hh + h) * N * P];
            const double* dyt = &dy[t * HPn + h * P];
            const double a = tp.slot_a[t * Hh + h];
            const double delta = tp.slot_delta[t * Hh + h];
            double* dxt = &dxBC_act[t * CC + h * P];
            double* dBt = &dxBC_act[t * CC + HPn];
            double* dCt = &dxBC_act[t * CC + HPn + N];

            // y_t = C_t h_t + D x_t
            for (std::size_t n = 0; n < N; ++n) {
                const double c = Ct[n];
                double dc_acc = 0.0;
                const double* sn = st + n * P;
                double* dhn = &dh[n * P];
                for (std::size_t pp = 0; pp < P; ++pp) {
                    dhn[pp] += c * dyt[pp];
                    dc_acc += sn[pp] * dyt[pp];
                }
                dCt[n] += dc_acc;
            }
            double dD = 0.0;
            for (std::size_t pp = 0; pp < P; ++pp) {
                dD += xt[pp] * dyt[pp];
                dxt[pp] += p.D[h] * dyt[pp];
            }
            g.D[h] += dD;

            // h_t = a h_{t-1} + (delta B_t) x_t^T
            const double* sprev = (t > 0) ? &tp.states[((t - 1) * Hh + h) * N * P] : nullptr;
            double da = 0.0;
            double ddelta = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double* dhn = &dh[n * P];
                double dw = 0.0;
                for (std::size_t pp = 0; pp < P; ++pp) dw += dhn[pp] * xt[pp];
                ddelta += dw * Bt[n];
                dBt[n] += dw * delta;
                if (sprev) {
                    const double* sp = sprev + n * P;
                    for (std::size_t pp = 0; pp < P; ++pp) da += dhn[pp] * sp[pp];
                }
            }
            for (std::size_t pp = 0; pp < P; ++pp) {
                double v = 0.0;
                for (std::size_t n = 0; n < N; ++n) v += dh[n * P + pp] * Bt[n];
                dxt[pp] += delta * v;
            }

            // a = exp(-delta * A)
            ddelta += da * (-A * a);
            g.a_log[h] += da * (-delta * A * a);

            // delta = softplus(pre), pre = dt_base[fid] + dt_bias[h] + gamma*b
            const double dpre = ddelta * sigmoid(tp.slot_pre[t * Hh + h]);
            const std::size_t fid = tp.filter_ids[t * Hh + h];
            ddt_base[t * M + fid] += dpre;
            g.dt_bias[h] += dpre;
            if (h < Q) dbias_raw[t * Q + h] += gamma_eff * dpre;

            for (std::size_t i = 0; i < N * P; ++i) dh[i] *= a;
        }
    }

    // 4. router: hb = [r || dt_base] . W_h
    const std::size_t width = E + Q;
    if (width > 0) {
        std::vector<double> dhb(width);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t j = 0; j < E; ++j) dhb[j] = dscores[t * E + j];
            for (std::size_t j = 0; j < Q; ++j) dhb[E + j] = dbias_raw[t * Q + j];
            const double* rt = &tp.r[t * d];
            const double* dtb = &tp.dt_base[t * M];
            for (std::size_t i = 0; i < d; ++i) {
                const double* row = &p.router.W_h[i * width];
                double* grow = &g.W_h[i * width];
                double v = 0.0;
                for (std::size_t j = 0; j < width; ++j) {
                    v += row[j] * dhb[j];
                    grow[j] += rt[i] * dhb[j];
                }
                dr[t * d + i] += v;
            }
            for (std::size_t i = 0; i < M; ++i) {
                const double* row = &p.router.W_h[(d + i) * width];
                double* grow = &g.W_h[(d + i) * width];
                double v = 0.0;
                for (std::size_t j = 0; j < width; ++j) {
                    v += row[j] * dhb[j];
                    grow[j] += dtb[i] * dhb[j];
                }
                ddt_base[t * M + i] += v;
            }
        }
    }

    // 3. router feature back to the block input
    switch (cfg.mode) {
        case RouterMode::kInputOnly:
            for (std::size_t i = 0; i < T * d; ++i) du[i] += dr[i];
            break;
        case RouterMode::kPositionBias:
            break;  // constant wrt input
        default:
            spectral_residual_backward(dr, T, d, du);
    }

    // 2. SiLU then depthwise causal conv
    std::vector<double> dxBC_conv(T * CC);
    for (std::size_t i = 0; i < T * CC; ++i)
        dxBC_conv[i] = dxBC_act[i] * silu_grad(tp.xBC_conv[i]);
    std::vector<double> dxBC_proj(T * CC, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < CC; ++c) {
            const double dv = dxBC_conv[t * CC + c];
            g.conv_b[c] += dv;
            for (std::size_t j = 0; j < dc; ++j) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + j) -
                                           static_cast<std::ptrdiff_t>(dc - 1);
                if (src < 0) continue;  // zero padding
                g.conv_w[c * dc + j] += dv * tp.xBC_proj[src * CC + c];
                dxBC_proj[src * CC + c] += dv * p.conv_w[c * dc + j];
            }
        }
    }

    // 1. packed projection [z | xBC | dt]
    std::vector<double> dzx(W);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < HPn; ++j) dzx[j] = dz[t * HPn + j];
        for (std::size_t j = 0; j < CC; ++j) dzx[HPn + j] = dxBC_proj[t * CC + j];
        for (std::size_t j = 0; j < M; ++j) dzx[HPn + CC + j] = ddt_base[t * M + j];
        const double* ut = &tp.u[t * d];
        for (std::size_t i = 0; i < d; ++i) {
            const double* row = &p.W_in[i * W];
            double* grow = &g.W_in[i * W];
            double v = 0.0;
            for (std::size_t j = 0; j < W; ++j) {
                v += row[j] * dzx[j];
                grow[j] += ut[i] * dzx[j];
            }
            du[t * d + i] += v;
        }
    }
    return du;
}

}  // namespace

LossBreakdown total_loss(const std::vector<double>& logits,
                         const std::vector<std::uint32_t>& targets, std::size_t V,
                         double balance, double diversity, double lambda1,
                         double lambda2, std::vector<double>* dlogits) {
    const std::size_t T = targets.size();
    if (T == 0 || logits.size() != T * V)
        throw std::invalid_argument("total_loss: shape mismatch");
    if (dlogits) dlogits->assign(T * V, 0.0);
    double task = 0.0;
    std::vector<double> prob(V);
    for (std::size_t t = 0; t < T; ++t) {
        if (targets[t] >= V) throw std::invalid_argument("total_loss: target out of vocab");
        const double* lt = &logits[t * V];
        double mx = lt[0];
        for (std::size_t v = 1; v < V; ++v) mx = std::max(mx, lt[v]);
        double Z = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
            prob[v] = std::exp(lt[v] - mx);
            Z += prob[v];
        }
        task += -(lt[targets[t]] - mx - std::log(Z));
        if (dlogits) {
            double* dl = &(*dlogits)[t * V];
            const double f = 1.0 / static_cast<double>(T);
            for (std::size_t v = 0; v < V; ++v) dl[v] = prob[v] / Z * f;
            dl[targets[t]] -= f;
        }
    }
    task /= static_cast<double>(T);
    LossBreakdown lb;
    lb.task = task;
    lb.balance = balance;
    lb.diversity = diversity;
    lb.total = task + lambda1 * balance + lambda2 * diversity;
    check_finite(lb.total, "total loss");
    return lb;
}

LossBreakdown backward_sequence(const Model& m, const ModelTape& tape,
                                const std::vector<std::uint32_t>& targets,
                                Model& grads) {
    const auto& c = m.cfg;
    const std::size_t T = tape.T, d = c.d, V = c.V, L = c.L;
    if (targets.size() != T) throw std::invalid_argument("backward: target length mismatch");
    if (tape.blocks.size() != L || tape.layer_inputs.size() != L + 1)
        throw std::invalid_argument("backward: tape missing saved intermediates");

    // aux losses (mean over layers) recomputed from the tape
    double balance = 0.0, diversity = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const auto& bt = tape.blocks[l];
        balance += balance_loss(bt.scores, T, c.experts(), c.epsilon);
        diversity += diversity_loss(bt.y_slots, T, c.H, c.P);
    }
    if (L > 0) {
        balance /= static_cast<double>(L);
        diversity /= static_cast<double>(L);
    }

    std::vector<double> dlogits;
    LossBreakdown lb = total_loss(tape.logits, targets, V, balance, diversity,
                                  c.lambda1, c.lambda2, &dlogits);

    // logits projection
    std::vector<double> dfinal_normed(T * d, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const double* fn = &tape.final_normed[t * d];
        const double* dl = &dlogits[t * V];
        if (c.tie_embeddings) {
            for (std::size_t v = 0; v < V; ++v) {
                const double dv = dl[v];
                if (dv == 0.0) continue;
                const double* row = &m.embed_in[v * d];
                double* grow = &grads.embed_in[v * d];
                for (std::size_t i = 0; i < d; ++i) {
                    dfinal_normed[t * d + i] += dv * row[i];
                    grow[i] += dv * fn[i];
                }
            }
        } else {
            for (std::size_t i = 0; i < d; ++i) {
                const double* row = &m.embed_out[i * V];
                double* grow = &grads.embed_out[i * V];
                double acc = 0.0;
                for (std::size_t v = 0; v < V; ++v) {
                    acc += row[v] * dl[v];
                    grow[v] += fn[i] * dl[v];
                }
                dfinal_normed[t * d + i] += acc;
            }
        }
    }

    // final RMS norm
    std::vector<double> dU(T * d, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        rms_backward(&tape.final_in[t * d], m.final_norm.data(),
                     &dfinal_normed[t * d], &dU[t * d], grads.final_norm.data(), d);

    // layers in reverse; residual stream carries dU through each block
    const double c1 = (L > 0) ? c.lambda1 / static_cast<double>(L) : 0.0;
    const double c2 = (L > 0) ? c.lambda2 / static_cast<double>(L) : 0.0;
    for (std::size_t l = L; l-- > 0;) {
        auto& gb = grads.layers[l].block;
        BlockGrads bg{gb.W_in,   gb.conv_w,      gb.conv_b, gb.a_log, gb.D,
                      gb.dt_bias, gb.router.W_h, gb.norm_weight, gb.W_out};
        std::vector<double> dblock_in = block_backward(
            m.layers[l].block, c, tape.blocks[l], dU, c1, c2, bg);
        for (std::size_t t = 0; t < T; ++t)
            rms_backward(&tape.layer_inputs[l][t * d], m.layers[l].norm_w.data(),
                         &dblock_in[t * d], &dU[t * d],
                         grads.layers[l].norm_w.data(), d);
    }

    // embedding gather
    for (std::size_t t = 0; t < T; ++t) {
        double* grow = &grads.embed_in[tape.ids[t] * d];
        for (std::size_t i = 0; i < d; ++i) grow[i] += dU[t * d + i];
    }
    return lb;
}

}  // namespace hades
