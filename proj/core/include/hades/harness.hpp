#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hades/model.hpp"
#include "hades/rng.hpp"

namespace hades {

// Byte-level tokenizer: vocab is exactly the 256 byte values, no specials.
std::vector<std::uint32_t> byte_tokenize(const std::string& text);
std::string byte_detokenize(const std::vector<std::uint32_t>& ids);
inline constexpr std::size_t kByteVocab = 256;

struct PasskeySpec {
    std::vector<std::size_t> context_lengths = {256, 512, 1024, 2048, 4096};
    std::vector<double> depths = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                  0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t trials = 10;
};

struct PasskeyPrompt {
    std::vector<std::uint32_t> ids;
    std::vector<std::string> labels;  // per token: task_description/passkey/query/dummy
    std::string passkey;              // 5 digits
};

// Four-part prompt: task description, dummy filler split around the passkey
// sentence pair at `depth` (fraction of the filler budget placed before it),
// then the query suffix. Filler is truncated only at sentence-block granules.
PasskeyPrompt build_passkey_prompt(std::size_t context_length, double depth,
                                   Rng& rng);

struct PasskeyCell {
    std::size_t context_length = 0;
    double depth = 0.0;
    std::size_t score = 0;   // exact matches
    std::size_t trials = 0;
};

// Greedy-decodes 5 tokens after each prompt; exact digit match scores 1.
std::vector<PasskeyCell> score_passkey(const Model& m, const PasskeySpec& spec,
                                       std::uint64_t seed);

void write_passkey_csv(const std::vector<PasskeyCell>& grid,
                       const std::string& path, const std::string& header_note);

// First half random symbols from [0, vocab), a delimiter, then the sequence
// repeats; targets are the next-token labels. T must be even.
void copy_task(Rng& rng, std::size_t T, std::size_t vocab,
               std::vector<std::uint32_t>& input, std::vector<std::uint32_t>& target);
inline constexpr std::uint32_t kCopyDelimiter = 0;

// Token positions of `target` that lie in the copy region (second half).
std::size_t copy_region_start(std::size_t T);

// Sum of a slow and a fast sinusoid with random phases, quantized to 16
// levels; next-token targets. T >= 32.
void freq_mix_task(Rng& rng, std::size_t T, std::vector<std::uint32_t>& input,
                   std::vector<std::uint32_t>& target, std::size_t* slow_bin = nullptr,
                   std::size_t* fast_bin = nullptr, double fast_amp = 1.0);
inline constexpr std::size_t kFreqLevels = 16;

}  // namespace hades
