#pragma once

#include <cstdint>
#include <vector>

#include "hades/tensor.hpp"

namespace hades {

// Counter-based deterministic generator (SplitMix64 over an incrementing
// counter). Identical seed gives an identical stream on every platform.
// Single-owner: do not draw from one Rng concurrently.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double next_double();

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller over the counter stream.
    double next_normal();

    // Independent stream derived from (seed, stream_id).
    Rng split(std::uint64_t stream_id) const;

    Tensor normal(const std::vector<std::size_t>& shape);

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hades
