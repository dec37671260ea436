#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hades/analysis.hpp"
#include "hades/checkpoint.hpp"
#include "hades/harness.hpp"
#include "hades/params_flops.hpp"
#include "hades/runconfig.hpp"
#include "hades/ssm.hpp"
#include "hades/trainer.hpp"

namespace {

// Exit codes: 2 invalid config/arguments, 3 missing file, 4 numerical
// failure, 5 gradcheck failure.
constexpr int kExitBadConfig = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitGradcheck = 5;

int classify(const std::exception& e) {
    const std::string what = e.what();
    if (what.rfind("cannot open", 0) == 0 || what.find(": cannot open") != std::string::npos)
        return kExitMissingFile;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitBadConfig;
    return kExitNumerical;
}

hades::RunConfig load_preset(const std::string& name) {
    if (name == "desk-tiny") return hades::preset_desk_tiny();
    if (name == "paper-370m") return hades::preset_paper_370m();
    throw std::invalid_argument("unknown preset: " + name);
}

// Seed precedence: --seed flag > HADES_SEED env > config file.
void apply_seed(hades::RunConfig& rc, const CLI::Option* flag, std::uint64_t flag_val) {
    if (flag->count() > 0) {
        rc.seed = flag_val;
        return;
    }
    if (const char* env = std::getenv("HADES_SEED")) rc.seed = std::stoull(env);
}

std::vector<std::uint32_t> tokens_from_file(const std::string& path, std::size_t V) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    std::vector<std::uint32_t> ids = hades::byte_tokenize(text);
    for (std::uint32_t id : ids)
        if (id >= V)
            throw std::invalid_argument("input byte " + std::to_string(id) +
                                        " outside model vocab");
    if (ids.empty()) throw std::invalid_argument("empty input file");
    return ids;
}

// Per-slot discretized head over one forward pass of `ids`.
hades::HeadDiscretized slot_head(const hades::Model& m, const hades::ModelTape& tape,
                                 std::size_t layer, std::size_t h) {
    const auto& c = m.cfg;
    const auto& bt = tape.blocks.at(layer);
    hades::HeadDiscretized hd;
    hd.T = bt.T;
    hd.N = c.N;
    hd.D = m.layers[layer].block.D[h];
    hd.a.resize(bt.T);
    hd.delta.resize(bt.T);
    hd.Bbar.resize(bt.T * c.N);
    hd.C.resize(bt.T * c.N);
    const std::size_t HP = c.H * c.P, CC = c.conv_channels();
    for (std::size_t t = 0; t < bt.T; ++t) {
        hd.a[t] = bt.slot_a[t * c.H + h];
        hd.delta[t] = bt.slot_delta[t * c.H + h];
        for (std::size_t n = 0; n < c.N; ++n) {
            hd.Bbar[t * c.N + n] = bt.xBC_act[t * CC + HP + n];
            hd.C[t * c.N + n] = bt.xBC_act[t * CC + HP + c.N + n];
        }
    }
    return hd;
}

hades::Batch make_batch(const hades::RunConfig& rc, std::size_t step) {
    hades::Batch batch;
    hades::Rng rng = hades::Rng(rc.seed).split(step);
    for (std::size_t b = 0; b < rc.batch; ++b) {
        std::vector<std::uint32_t> in, tgt;
        if (rc.task == "copy") {
            hades::copy_task(rng, rc.seq_len, rc.model.V, in, tgt);
        } else if (rc.task == "freq_mix") {
            hades::freq_mix_task(rng, rc.seq_len, in, tgt);
        } else {  // passkey: prompt plus " <key>." continuation
            const double depth =
                0.1 * static_cast<double>(rng.next_below(11));
            hades::PasskeyPrompt p =
                hades::build_passkey_prompt(rc.seq_len, depth, rng);
            in = p.ids;
            for (std::uint32_t id : hades::byte_tokenize(" " + p.passkey + "."))
                in.push_back(id);
            tgt.assign(in.size(), '.');
            for (std::size_t t = 0; t + 1 < in.size(); ++t) tgt[t] = in[t + 1];
        }
        batch.inputs.push_back(std::move(in));
        batch.targets.push_back(std::move(tgt));
    }
    return batch;
}

int cmd_train(const std::string& config_path, const CLI::Option* seed_flag,
              std::uint64_t seed_val) {
    hades::RunConfig rc = hades::run_config_from_file(config_path);
    apply_seed(rc, seed_flag, seed_val);
    std::filesystem::create_directories(rc.out_dir);
    hades::Rng rng(rc.seed);
    hades::Model m = hades::random_model(rc.model, rng);

    hades::TrainConfig tc;
    tc.steps = rc.steps;
    tc.opt = rc.optimizer();
    tc.metrics_path = rc.out_dir + "/metrics.csv";
    tc.ckpt_dir = rc.out_dir;
    tc.ckpt_every = rc.ckpt_every;
    tc.header_note = "config_hash=" + hades::config_hash(rc.model) + " task=" + rc.task;

    auto log = hades::train_loop(m, tc, [&](std::size_t step) { return make_batch(rc, step); });
    if (!log.empty())
        std::cout << "final: task=" << log.back().loss.task
                  << " total=" << log.back().loss.total << "\n";
    std::cout << "metrics: " << tc.metrics_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical adaptive filter-bank SSM toolkit"};
    app.require_subcommand(1);

    // init-config
    auto* init = app.add_subcommand("init-config", "write a preset run config");
    std::string preset = "desk-tiny", init_out = "run.cfg";
    init->add_option("--preset", preset, "desk-tiny or paper-370m");
    init->add_option("--out", init_out, "output path");

    // train
    auto* train = app.add_subcommand("train", "run the training loop");
    std::string train_cfg;
    std::uint64_t seed_val = 0;
    train->add_option("--config", train_cfg, "run config file")->required();
    auto* seed_flag = train->add_option("--seed", seed_val, "override seed");

    // generate
    auto* gen = app.add_subcommand("generate", "greedy decode from a checkpoint");
    std::string gen_ckpt, gen_prompt = " ";
    std::size_t gen_max = 64;
    gen->add_option("--ckpt", gen_ckpt)->required();
    gen->add_option("--prompt", gen_prompt);
    gen->add_option("--max-tokens", gen_max);

    // passkey
    auto* pk = app.add_subcommand("passkey", "retrieval score grid");
    std::string pk_ckpt, pk_out = "passkey.csv";
    bool pk_paper = false;
    std::size_t pk_trials = 10;
    std::uint64_t pk_seed = 0;
    pk->add_option("--ckpt", pk_ckpt)->required();
    pk->add_option("--out", pk_out);
    pk->add_option("--trials", pk_trials);
    pk->add_option("--seed", pk_seed);
    pk->add_flag("--paper-grid", pk_paper, "context lengths 1K..16K");

    // analyze
    auto* an = app.add_subcommand("analyze", "diagnostic CSV exports");
    an->require_subcommand(1);
    std::string an_ckpt, an_input, an_out = "analysis.csv";
    std::size_t an_layer = 0;
    for (auto* sub : {an->add_subcommand("spectrum", "output spectrum of one layer"),
                      an->add_subcommand("response", "per-slot frequency response"),
                      an->add_subcommand("effrank", "per-layer effective rank"),
                      an->add_subcommand("cka", "slot-by-slot linear CKA of one layer"),
                      an->add_subcommand("barcode", "token x expert activations"),
                      an->add_subcommand("delta-hist", "delta shift histogram")}) {
        sub->add_option("--ckpt", an_ckpt)->required();
        sub->add_option("--input", an_input)->required();
        sub->add_option("--out", an_out);
        sub->add_option("--layer", an_layer);
    }

    // params / flops
    auto* pr = app.add_subcommand("params", "parameter count report");
    auto* fl = app.add_subcommand("flops", "per-token FLOPs report");
    std::string pf_cfg, pf_preset;
    bool pf_json = false;
    std::size_t fl_seqlen = 2048;
    for (auto* sub : {pr, fl}) {
        sub->add_option("--config", pf_cfg, "run config file");
        sub->add_option("--preset", pf_preset, "desk-tiny or paper-370m");
        sub->add_flag("--json", pf_json);
    }
    fl->add_option("--seqlen", fl_seqlen);

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
    std::uint64_t gc_seed = 7;
    std::size_t gc_seeds = 1;
    gc->add_option("--seed", gc_seed, "first seed");
    gc->add_option("--seeds", gc_seeds, "number of consecutive seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*init) {
            hades::RunConfig rc = load_preset(preset);
            hades::write_run_config(rc, init_out);
            std::cout << "wrote " << init_out << "\n";
            return 0;
        }
        if (*train) return cmd_train(train_cfg, seed_flag, seed_val);
        if (*gen) {
            hades::Model m = hades::load_checkpoint(gen_ckpt);
            std::vector<std::uint32_t> prompt = hades::byte_tokenize(gen_prompt);
            for (std::uint32_t id : prompt)
                if (id >= m.cfg.V) throw std::invalid_argument("prompt byte outside vocab");
            auto out = hades::greedy_generate(m, prompt, gen_max);
            std::cout << hades::byte_detokenize(out) << "\n";
            return 0;
        }
        if (*pk) {
            hades::Model m = hades::load_checkpoint(pk_ckpt);
            hades::PasskeySpec spec;
            if (pk_paper) spec.context_lengths = {1024, 2048, 4096, 8192, 16384};
            spec.trials = pk_trials;
            auto grid = hades::score_passkey(m, spec, pk_seed);
            hades::write_passkey_csv(grid, pk_out,
                                     "config_hash=" + hades::config_hash(m.cfg));
            std::cout << "wrote " << pk_out << "\n";
            return 0;
        }
        if (*an) {
            hades::Model m = hades::load_checkpoint(an_ckpt);
            const auto& c = m.cfg;
            if (an_layer >= c.L) throw std::invalid_argument("--layer out of range");
            const std::string note = "config_hash=" + hades::config_hash(c) +
                                     " layer=" + std::to_string(an_layer);
            std::vector<std::uint32_t> ids = tokens_from_file(an_input, c.V);
            hades::ModelTape tape;
            auto fr = hades::model_forward(m, ids, nullptr, &tape);
            const auto& bt = tape.blocks[an_layer];
            if (an->get_subcommand("spectrum")->parsed()) {
                auto rep = hades::output_spectrum(bt.y_slots, bt.T, c.H * c.P);
                hades::write_spectrum_csv(rep, an_out, note);
            } else if (an->get_subcommand("response")->parsed()) {
                std::ofstream f(an_out);
                if (!f) throw std::runtime_error("cannot open " + an_out);
                f << "# " << note << " normalization=l2\n";
                std::vector<std::vector<double>> curves;
                for (std::size_t h = 0; h < c.H; ++h)
                    curves.push_back(hades::frequency_response(
                        hades::materialize_matrix(slot_head(m, tape, an_layer, h))));
                f << "bin";
                for (std::size_t h = 0; h < c.H; ++h) f << ",slot" << h;
                f << "\n";
                for (std::size_t k = 0; k < bt.T; ++k) {
                    f << k;
                    for (std::size_t h = 0; h < c.H; ++h) f << ',' << curves[h][k];
                    f << "\n";
                }
            } else if (an->get_subcommand("effrank")->parsed()) {
                std::ofstream f(an_out);
                if (!f) throw std::runtime_error("cannot open " + an_out);
                f << "# " << note << "\nlayer,effective_rank\n";
                for (std::size_t l = 0; l < c.L; ++l) {
                    std::vector<double> stack;
                    for (std::size_t h = 0; h < c.H; ++h) {
                        auto curve = hades::frequency_response(
                            hades::materialize_matrix(slot_head(m, tape, l, h)));
                        stack.insert(stack.end(), curve.begin(), curve.end());
                    }
                    f << l << ',' << hades::effective_rank(stack, c.H, tape.T) << "\n";
                }
            } else if (an->get_subcommand("cka")->parsed()) {
                // slot outputs as T x P features
                std::ofstream f(an_out);
                if (!f) throw std::runtime_error("cannot open " + an_out);
                f << "# " << note << "\n";
                const std::size_t HP = c.H * c.P;
                auto slot_feat = [&](std::size_t h) {
                    std::vector<double> X(bt.T * c.P);
                    for (std::size_t t = 0; t < bt.T; ++t)
                        for (std::size_t p = 0; p < c.P; ++p)
                            X[t * c.P + p] = bt.y_slots[t * HP + h * c.P + p];
                    return X;
                };
                double off = 0.0;
                for (std::size_t i = 0; i < c.H; ++i) {
                    for (std::size_t j = 0; j < c.H; ++j) {
                        const double v = hades::linear_cka(slot_feat(i), bt.T, c.P,
                                                           slot_feat(j), c.P);
                        f << v << (j + 1 < c.H ? "," : "\n");
                        if (i != j) off += v;
                    }
                }
                if (c.H > 1) f << "# mean_off_diagonal=" << off / double(c.H * (c.H - 1)) << "\n";
            } else if (an->get_subcommand("barcode")->parsed()) {
                hades::write_barcode_csv(fr.records[an_layer], c.experts(), {},
                                         an_out, note);
            } else {
                auto hist = hades::delta_shift_histogram(
                    m, ids, hades::make_histogram(-0.5, 0.5, 101));
                hades::write_histogram_csv(hist, an_out, note);
            }
            std::cout << "wrote " << an_out << "\n";
            return 0;
        }
        if (*pr || *fl) {
            hades::ModelConfig mc;
            std::size_t seqlen = fl_seqlen;
            if (!pf_cfg.empty()) {
                hades::RunConfig rc = hades::run_config_from_file(pf_cfg);
                mc = rc.model;
                if (*fl && fl->get_option("--seqlen")->count() == 0) seqlen = rc.seq_len;
            } else if (!pf_preset.empty()) {
                mc = load_preset(pf_preset).model;
            } else {
                throw std::invalid_argument("need --config or --preset");
            }
            if (*pr) {
                auto rep = hades::count_params(mc);
                std::cout << (pf_json ? rep.to_json() : rep.to_text()) << "\n";
            } else {
                auto rep = hades::count_flops(mc, seqlen);
                std::cout << (pf_json ? rep.to_json() : rep.to_text()) << "\n";
            }
            return 0;
        }
        if (*gc) {
            if (gc->count("--seed") == 0) {
                if (const char* env = std::getenv("HADES_SEED"))
                    gc_seed = std::stoull(env);
            }
            hades::ModelConfig mc = hades::preset_desk_tiny().model;
            bool all_pass = true;
            std::size_t done = 0;
            for (std::uint64_t s = gc_seed; done < gc_seeds; ++s) {
                auto res = hades::grad_check(mc, s);
                if (res.skipped) {
                    std::cout << "seed " << s << ": skipped (near tie)\n";
                    continue;
                }
                ++done;
                std::cout << "seed " << s << ": " << (res.pass ? "pass" : "FAIL")
                          << " max_rel_err=" << res.max_rel_err << " at "
                          << res.worst_param << " (" << res.checked << " params)\n";
                all_pass = all_pass && res.pass;
            }
            return all_pass ? 0 : kExitGradcheck;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return 0;
}
