#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hades/model.hpp"

namespace hades {

struct LossBreakdown {
    double task = 0.0;       // cross-entropy, nats/token
    double balance = 0.0;
    double diversity = 0.0;
    double total = 0.0;      // task + lambda1*balance + lambda2*diversity
};

// Mean cross-entropy over tokens plus weighted aux terms. When dlogits is
// non-null it receives d(task)/d(logits), i.e. (softmax - onehot)/T.
LossBreakdown total_loss(const std::vector<double>& logits,
                         const std::vector<std::uint32_t>& targets, std::size_t V,
                         double balance, double diversity, double lambda1,
                         double lambda2, std::vector<double>* dlogits = nullptr);

// Hand-written reverse pass over one sequence. Adds d(total)/d(theta) into
// `grads` (a zero-initialized Model of the same config). Top-Q selection is a
// constant index set: scores get gradient only through the balance loss.
LossBreakdown backward_sequence(const Model& m, const ModelTape& tape,
                                const std::vector<std::uint32_t>& targets,
                                Model& grads);

struct AdamWConfig {
    double lr = 4.8e-3;        // peak
    std::size_t warmup = 100;  // linear warmup steps
    std::size_t horizon = 1000;  // cosine decay horizon (total steps)
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled
    double clip = 1.0;          // global-norm clip; <=0 disables
    double min_lr_frac = 0.1;   // cosine floor as fraction of peak
};

struct OptimizerState {
    std::vector<double> m1;  // first moments, flat over visit_params order
    std::vector<double> m2;  // second moments
    std::size_t step = 0;
};

OptimizerState make_optimizer_state(const Model& m);

// Linear warmup to peak, then cosine to min_lr_frac*peak at `horizon`.
double lr_at(const AdamWConfig& cfg, std::size_t step);

// Scales grads in place so the global norm is at most max_norm; returns the
// pre-clip norm.
double clip_global_norm(Model& grads, double max_norm);

// One decoupled-weight-decay Adam update; lr as given (already scheduled).
void adamw_step(Model& params, const Model& grads, OptimizerState& state,
                const AdamWConfig& cfg, double lr);

// One training batch: parallel arrays of token sequences.
struct Batch {
    std::vector<std::vector<std::uint32_t>> inputs;
    std::vector<std::vector<std::uint32_t>> targets;
};

using TaskStream = std::function<Batch(std::size_t step)>;

struct TrainConfig {
    std::size_t steps = 0;
    AdamWConfig opt;
    std::string metrics_path;   // CSV: step,task,balance,diversity,total,lr,grad_norm
    std::string ckpt_dir;       // empty disables checkpoints
    std::size_t ckpt_every = 0; // 0: only initial + final
    std::string header_note;    // provenance line for the metrics CSV
};

struct StepMetrics {
    std::size_t step = 0;
    LossBreakdown loss;
    double lr = 0.0;
    double grad_norm = 0.0;
};

// Deterministic given the model and task stream. Aborts (throws) if the task
// loss goes non-finite.
std::vector<StepMetrics> train_loop(Model& m, const TrainConfig& cfg,
                                    const TaskStream& task);

struct GradCheckResult {
    bool pass = false;
    bool skipped = false;   // near-tie seed excluded per the gradient contract
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t checked = 0;
};

// Central finite differences over every parameter against backward_sequence.
// Seeds where any token's top-Q score margin is below tie_margin are skipped.
GradCheckResult grad_check(const ModelConfig& cfg, std::uint64_t seed,
                           std::size_t T = 8, double fd_step = 1e-5,
                           double tol = 1e-5, double tie_margin = 1e-3);

}  // namespace hades
