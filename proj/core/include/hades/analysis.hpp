#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hades/model.hpp"
#include "hades/ssm.hpp"

namespace hades {

struct SpectralReport {
    std::vector<double> magnitude;  // bins 0..T-1, two-sided
    bool degenerate = false;        // all-zero signal: left unnormalized
    std::string normalization = "max";
};

// DFT along time per channel, magnitudes averaged over channels, then
// max-normalized. y is T x P row-major.
SpectralReport output_spectrum(const std::vector<double>& y, std::size_t T,
                               std::size_t P);

// Row norms of Lambda = F . M . F^H with F the unitary DFT matrix, then the
// whole curve l2-normalized. O(T^3); refuses T above `cap`.
std::vector<double> frequency_response(const FilterMatrix& fm, std::size_t cap = 512);

// Roy-Vetterli effective rank: exp of the entropy of the normalized singular
// value distribution. Throws on an all-zero matrix.
double effective_rank(const std::vector<double>& a, std::size_t rows,
                      std::size_t cols);

// Linear CKA of column-mean-centered features, in [0,1]. X is n x d1, Y is
// n x d2. A zero-variance input sets *degenerate and returns 0.
double linear_cka(const std::vector<double>& X, std::size_t n, std::size_t d1,
                  const std::vector<double>& Y, std::size_t d2,
                  bool* degenerate = nullptr);

struct Histogram {
    std::vector<double> edges;   // B+1 ascending
    std::vector<std::uint64_t> counts;  // B; out-of-range clamps to end bins
    std::uint64_t total = 0;

    void add(double v);
};

Histogram make_histogram(double lo, double hi, std::size_t bins);

// Delta_HADES - Delta_base per expert slot over a forward pass of `ids`,
// aggregated across layers. gamma = 0 puts all mass in the bin containing 0.
Histogram delta_shift_histogram(const Model& m,
                                const std::vector<std::uint32_t>& ids,
                                Histogram hist);

// Binary token x expert activation matrix with per-token region labels.
// Throws if labels (when non-empty) do not match the record count.
void write_barcode_csv(const std::vector<SelectionRecord>& records,
                       std::size_t E, const std::vector<std::string>& labels,
                       const std::string& path, const std::string& header_note);

void write_spectrum_csv(const SpectralReport& rep, const std::string& path,
                        const std::string& header_note);

void write_curve_csv(const std::vector<double>& curve, const std::string& column,
                     const std::string& path, const std::string& header_note);

void write_histogram_csv(const Histogram& h, const std::string& path,
                         const std::string& header_note);

}  // namespace hades
