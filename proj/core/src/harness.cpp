#include "hades/harness.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace hades {

std::vector<std::uint32_t> byte_tokenize(const std::string& text) {
    std::vector<std::uint32_t> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(c);
    return ids;
}

std::string byte_detokenize(const std::vector<std::uint32_t>& ids) {
    std::string out;
    out.reserve(ids.size());
    for (std::uint32_t id : ids) {
        if (id >= kByteVocab) throw std::invalid_argument("byte_detokenize: id out of vocab");
        out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    }
    return out;
}

namespace {

const char* kTaskText =
    "There is an important piece of information hidden inside a lot of "
    "irrelevant text. Find it and memorize it. I will quiz you about this "
    "important information.";
const char* kDummyText =
    "The grass is green. The sky is blue. The sun is yellow. Here we go. "
    "There and back again.";
const char* kQueryText = "What is the pass key? The pass key is";

void append_segment(PasskeyPrompt& p, const std::string& text,
                    const std::string& label) {
    for (std::uint32_t id : byte_tokenize(text)) {
        p.ids.push_back(id);
        p.labels.push_back(label);
    }
}

}  // namespace

PasskeyPrompt build_passkey_prompt(std::size_t context_length, double depth,
                                   Rng& rng) {
    if (depth < 0.0 || depth > 1.0)
        throw std::invalid_argument("build_passkey_prompt: depth out of [0,1]");
    PasskeyPrompt p;
    const std::uint64_t key = 10000 + rng.next_below(90000);
    p.passkey = std::to_string(key);
    const std::string key_pair = "The pass key is " + p.passkey +
                                 ". Remember it. " + p.passkey +
                                 " is the pass key.";
    const std::size_t granule = 1 + std::string(kDummyText).size();  // " " + block
    const std::size_t fixed = std::string(kTaskText).size() + 1 + key_pair.size() +
                              1 + std::string(kQueryText).size();
    if (context_length < fixed)
        throw std::invalid_argument("build_passkey_prompt: context too short");
    const std::size_t g = (context_length - fixed) / granule;
    const std::size_t before =
        static_cast<std::size_t>(std::llround(depth * static_cast<double>(g)));
    const std::size_t after = g - before;

    append_segment(p, kTaskText, "task_description");
    for (std::size_t i = 0; i < before; ++i)
        append_segment(p, std::string(" ") + kDummyText, "dummy");
    append_segment(p, " " + key_pair, "passkey");
    for (std::size_t i = 0; i < after; ++i)
        append_segment(p, std::string(" ") + kDummyText, "dummy");
    append_segment(p, std::string(" ") + kQueryText, "query");
    return p;
}

std::vector<PasskeyCell> score_passkey(const Model& m, const PasskeySpec& spec,
                                       std::uint64_t seed) {
    std::vector<PasskeyCell> grid;
    Rng base(seed);
    std::uint64_t stream = 0;
    for (std::size_t len : spec.context_lengths) {
        for (double depth : spec.depths) {
            PasskeyCell cell;
            cell.context_length = len;
            cell.depth = depth;
            cell.trials = spec.trials;
            for (std::size_t trial = 0; trial < spec.trials; ++trial) {
                Rng rng = base.split(stream++);
                PasskeyPrompt prompt = build_passkey_prompt(len, depth, rng);
                // greedy decode; " " typically precedes the digits
                std::vector<std::uint32_t> out = greedy_generate(m, prompt.ids, 7);
                const std::string text = byte_detokenize(out);
                if (text.find(prompt.passkey) != std::string::npos) cell.score += 1;
            }
            grid.push_back(cell);
        }
    }
    return grid;
}

void write_passkey_csv(const std::vector<PasskeyCell>& grid,
                       const std::string& path, const std::string& header_note) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# " << header_note << "\n";
    f << "context_length,depth_percent,score,trials\n";
    for (const auto& c : grid)
        f << c.context_length << ',' << std::llround(c.depth * 100.0) << ','
          << c.score << ',' << c.trials << "\n";
}

void copy_task(Rng& rng, std::size_t T, std::size_t vocab,
               std::vector<std::uint32_t>& input, std::vector<std::uint32_t>& target) {
    if (T % 2 != 0 || T < 4) throw std::invalid_argument("copy_task: T must be even, >= 4");
    if (vocab < 2) throw std::invalid_argument("copy_task: vocab too small");
    const std::size_t R = T / 2 - 1;
    input.assign(T, kCopyDelimiter);
    for (std::size_t i = 0; i < R; ++i)
        input[i] = 1 + static_cast<std::uint32_t>(rng.next_below(vocab - 1));
    for (std::size_t i = 0; i < R; ++i) input[R + 1 + i] = input[i];
    // input = [r_0..r_{R-1}, DELIM, r_0..r_{R-1}, DELIM]
    target.assign(T, kCopyDelimiter);
    for (std::size_t t = 0; t + 1 < T; ++t) target[t] = input[t + 1];
}

std::size_t copy_region_start(std::size_t T) { return T / 2 - 1; }

void freq_mix_task(Rng& rng, std::size_t T, std::vector<std::uint32_t>& input,
                   std::vector<std::uint32_t>& target, std::size_t* slow_bin,
                   std::size_t* fast_bin, double fast_amp) {
    if (T < 32) throw std::invalid_argument("freq_mix_task: T < 32");
    const std::size_t fs = 2, ff = (3 * T) / 8;
    if (slow_bin) *slow_bin = fs;
    if (fast_bin) *fast_bin = ff;
    const double p1 = 2.0 * M_PI * rng.next_double();
    const double p2 = 2.0 * M_PI * rng.next_double();
    std::vector<double> x(T);
    double lo = 1e300, hi = -1e300;
    for (std::size_t t = 0; t < T; ++t) {
        const double w = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(T);
        x[t] = std::sin(w * static_cast<double>(fs) + p1) +
               fast_amp * std::sin(w * static_cast<double>(ff) + p2);
        lo = std::min(lo, x[t]);
        hi = std::max(hi, x[t]);
    }
    input.assign(T, 0);
    const double span = hi - lo;
    for (std::size_t t = 0; t < T; ++t) {
        const double q =
            (span > 0.0) ? (x[t] - lo) / span * (kFreqLevels - 1) : 0.0;
        input[t] = static_cast<std::uint32_t>(std::llround(q));
    }
    target.assign(T, 0);
    for (std::size_t t = 0; t + 1 < T; ++t) target[t] = input[t + 1];
}

}  // namespace hades
