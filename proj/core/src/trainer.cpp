#include "hades/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "hades/checkpoint.hpp"
#include "hades/tensor.hpp"

namespace hades {

OptimizerState make_optimizer_state(const Model& m) {
    OptimizerState s;
    const std::size_t n = total_param_count(m);
    s.m1.assign(n, 0.0);
    s.m2.assign(n, 0.0);
    s.step = 0;
    return s;
}

double lr_at(const AdamWConfig& cfg, std::size_t step) {
    if (cfg.warmup > 0 && step < cfg.warmup)
        return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(cfg.warmup);
    if (cfg.horizon <= cfg.warmup) return cfg.lr;
    double prog = static_cast<double>(step - cfg.warmup) /
                  static_cast<double>(cfg.horizon - cfg.warmup);
    prog = std::min(1.0, std::max(0.0, prog));
    const double floor = cfg.min_lr_frac;
    return cfg.lr * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(M_PI * prog)));
}

double clip_global_norm(Model& grads, double max_norm) {
    double sq = 0.0;
    visit_params(grads, [&](const std::string&, std::vector<double>& t,
                            const std::vector<std::size_t>&) {
        for (double v : t) sq += v * v;
    });
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        visit_params(grads, [&](const std::string&, std::vector<double>& t,
                                const std::vector<std::size_t>&) {
            for (double& v : t) v *= scale;
        });
    }
    return norm;
}

void adamw_step(Model& params, const Model& grads, OptimizerState& state,
                const AdamWConfig& cfg, double lr) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    // walk both models in the shared visit order via a flat offset
    std::vector<const std::vector<double>*> gts;
    visit_params(const_cast<Model&>(grads),
                 [&](const std::string&, std::vector<double>& t,
                     const std::vector<std::size_t>&) { gts.push_back(&t); });
    std::size_t ti = 0, off = 0;
    visit_params(params, [&](const std::string&, std::vector<double>& t,
                             const std::vector<std::size_t>&) {
        const std::vector<double>& g = *gts[ti++];
        if (g.size() != t.size()) throw std::invalid_argument("adamw: shape mismatch");
        for (std::size_t i = 0; i < t.size(); ++i) {
            double& m1 = state.m1[off + i];
            double& m2 = state.m2[off + i];
            m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g[i];
            m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mh = m1 / bc1;
            const double vh = m2 / bc2;
            t[i] -= lr * (mh / (std::sqrt(vh) + cfg.eps) + cfg.weight_decay * t[i]);
        }
        off += t.size();
    });
}

std::vector<StepMetrics> train_loop(Model& m, const TrainConfig& cfg,
                                    const TaskStream& task) {
    std::ofstream metrics;
    if (!cfg.metrics_path.empty()) {
        metrics.open(cfg.metrics_path);
        if (!metrics) throw std::runtime_error("cannot open " + cfg.metrics_path);
        if (!cfg.header_note.empty()) metrics << "# " << cfg.header_note << "\n";
        metrics << "step,task,balance,diversity,total,lr,grad_norm\n";
        metrics << std::setprecision(12);
    }
    auto ckpt = [&](const std::string& tag) {
        if (cfg.ckpt_dir.empty()) return;
        save_checkpoint(m, cfg.ckpt_dir + "/" + tag + ".ckpt");
    };
    ckpt("step_0");

    OptimizerState state = make_optimizer_state(m);
    std::vector<StepMetrics> log;
    log.reserve(cfg.steps);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        Batch batch = task(step);
        const std::size_t B = batch.inputs.size();
        if (B == 0 || batch.targets.size() != B)
            throw std::invalid_argument("train_loop: empty or mismatched batch");

        Model grads = make_model(m.cfg);
        LossBreakdown mean{};
        for (std::size_t b = 0; b < B; ++b) {
            ModelTape tape;
            model_forward(m, batch.inputs[b], nullptr, &tape);
            LossBreakdown lb = backward_sequence(m, tape, batch.targets[b], grads);
            mean.task += lb.task;
            mean.balance += lb.balance;
            mean.diversity += lb.diversity;
            mean.total += lb.total;
        }
        const double invB = 1.0 / static_cast<double>(B);
        mean.task *= invB;
        mean.balance *= invB;
        mean.diversity *= invB;
        mean.total *= invB;
        if (!std::isfinite(mean.task))
            throw std::runtime_error("train_loop: task loss diverged at step " +
                                     std::to_string(step));
        visit_params(grads, [&](const std::string&, std::vector<double>& t,
                                const std::vector<std::size_t>&) {
            for (double& v : t) v *= invB;
        });

        const double gnorm = clip_global_norm(grads, cfg.opt.clip);
        const double lr = lr_at(cfg.opt, step);
        adamw_step(m, grads, state, cfg.opt, lr);

        StepMetrics sm{step, mean, lr, gnorm};
        log.push_back(sm);
        if (metrics.is_open()) {
            metrics << step << ',' << mean.task << ',' << mean.balance << ','
                    << mean.diversity << ',' << mean.total << ',' << lr << ','
                    << gnorm << "\n";
        }
        if (cfg.ckpt_every > 0 && (step + 1) % cfg.ckpt_every == 0)
            ckpt("step_" + std::to_string(step + 1));
    }
    if (cfg.steps > 0) ckpt("final");
    return log;
}

GradCheckResult grad_check(const ModelConfig& cfg, std::uint64_t seed,
                           std::size_t T, double fd_step, double tol,
                           double tie_margin) {
    Rng rng(seed);
    Model m = random_model(cfg, rng);
    std::vector<std::uint32_t> ids(T), targets(T);
    for (std::size_t t = 0; t < T; ++t) {
        ids[t] = static_cast<std::uint32_t>(rng.next_below(cfg.V));
        targets[t] = static_cast<std::uint32_t>(rng.next_below(cfg.V));
    }

    ModelTape tape;
    model_forward(m, ids, nullptr, &tape);

    GradCheckResult res;
    // exclude seeds where any top-Q selection sits on a near tie
    const std::size_t E = cfg.experts(), Q = cfg.selected();
    if (Q > 0 && Q < E && cfg.mode != RouterMode::kFixed &&
        cfg.mode != RouterMode::kRandom) {
        for (const auto& bt : tape.blocks) {
            for (std::size_t t = 0; t < T; ++t) {
                std::vector<double> s(bt.scores.begin() + t * E,
                                      bt.scores.begin() + (t + 1) * E);
                std::sort(s.begin(), s.end(), std::greater<double>());
                if (s[Q - 1] - s[Q] < tie_margin) {
                    res.skipped = true;
                    return res;
                }
            }
        }
    }

    Model grads = make_model(cfg);
    backward_sequence(m, tape, targets, grads);

    auto loss_of = [&](const Model& mm) {
        ForwardResult fr = model_forward(mm, ids);
        return total_loss(fr.logits, targets, cfg.V, fr.balance, fr.diversity,
                          cfg.lambda1, cfg.lambda2)
            .total;
    };

    std::vector<std::vector<double>*> pts, gts;
    std::vector<std::string> names;
    visit_params(m, [&](const std::string& n, std::vector<double>& t,
                        const std::vector<std::size_t>&) {
        pts.push_back(&t);
        names.push_back(n);
    });
    visit_params(grads, [&](const std::string&, std::vector<double>& t,
                            const std::vector<std::size_t>&) { gts.push_back(&t); });

    res.pass = true;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        std::vector<double>& t = *pts[k];
        const std::vector<double>& g = *gts[k];
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double orig = t[i];
            // Richardson-extrapolated central differences: cancels the h^2
            // truncation term, which otherwise dominates the tolerance in
            // high-curvature regions of the loss.
            auto central = [&](double h) {
                t[i] = orig + h;
                const double lp = loss_of(m);
                t[i] = orig - h;
                const double lm = loss_of(m);
                t[i] = orig;
                return (lp - lm) / (2.0 * h);
            };
            const double d1 = central(fd_step);
            const double d2 = central(fd_step * 0.5);
            const double fd = (4.0 * d2 - d1) / 3.0;
            // the 1e-4 floor turns the check absolute (|err| < tol * 1e-4)
            // for near-zero gradients, where FD roundoff (~|loss|*1e-16/h)
            // otherwise dominates the relative error
            const double scale = std::max({std::abs(g[i]), std::abs(fd), 1e-4});
            const double rel = std::abs(g[i] - fd) / scale;
            ++res.checked;
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = names[k] + "[" + std::to_string(i) + "]";
            }
            if (rel > tol) res.pass = false;
        }
    }
    return res;
}

}  // namespace hades
