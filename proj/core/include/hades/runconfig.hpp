#pragma once

#include <cstddef>
#include <string>

#include "hades/config.hpp"
#include "hades/trainer.hpp"

namespace hades {

// Flat key = value run description shared by every CLI subcommand. Unknown
// keys are rejected; all fields are validated before any work starts.
struct RunConfig {
    ModelConfig model;

    // trainer
    double lr = 4.8e-3;
    std::size_t steps = 1000;
    std::size_t batch = 8;
    std::size_t seq_len = 64;
    std::uint64_t seed = 0;
    std::size_t warmup = 100;
    double clip = 1.0;
    double weight_decay = 0.0;
    std::size_t ckpt_every = 0;

    std::string task = "copy";  // copy | freq_mix | passkey
    std::string out_dir = "out";

    AdamWConfig optimizer() const;
    void validate() const;
};

RunConfig run_config_from_file(const std::string& path);
void write_run_config(const RunConfig& cfg, const std::string& path);

// Named presets for init-config.
RunConfig preset_desk_tiny();
RunConfig preset_paper_370m();

}  // namespace hades
