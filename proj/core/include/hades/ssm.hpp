#pragma once

#include <cstddef>
#include <vector>

namespace hades {

// One head's per-token discretized SSM parameters over a sequence of length T.
// a[t] in (0,1), delta[t] > 0, Bbar and C are T x N row-major.
struct HeadDiscretized {
    std::size_t T = 0;
    std::size_t N = 0;
    std::vector<double> a;      // T
    std::vector<double> Bbar;   // T x N
    std::vector<double> C;      // T x N
    std::vector<double> delta;  // T
    double D = 0.0;

    void validate() const;
};

// Lower-triangular T x T operator equivalent to the scan. Entry (t,s) for
// s <= t is C_t . (prod_{i=s+1..t} a_i) . (delta_s * Bbar_s), plus D on the
// diagonal.
struct FilterMatrix {
    std::size_t T = 0;
    std::vector<double> entries;  // T x T row-major

    double at(std::size_t t, std::size_t s) const { return entries[t * T + s]; }
};

// ln(1 + exp(x)) with an overflow-safe branch.
double softplus(double x);

// a = exp(-delta * exp(a_log)), strictly in (0,1) for delta > 0.
double decay(double delta, double a_log);

// Reference sequential scan. x is T x P row-major; returns T x P outputs:
//   h_t = a_t h_{t-1} + (delta_t Bbar_t) x_t^T,  y_t = C_t h_t + D x_t.
std::vector<double> scan_head(const HeadDiscretized& disc,
                              const std::vector<double>& x, std::size_t P);

// Same recurrence, also exposing every intermediate state h_t (T x N x P).
// Used by the backward pass and by state-inspection tests.
std::vector<double> scan_head_with_states(const HeadDiscretized& disc,
                                          const std::vector<double>& x,
                                          std::size_t P,
                                          std::vector<double>& states);

FilterMatrix materialize_matrix(const HeadDiscretized& disc);

// Time-invariant kernel [CB, CAB, ..., CA^K B] for diagonal A (entries adiag).
std::vector<double> kernel_lti(const std::vector<double>& adiag,
                               const std::vector<double>& B,
                               const std::vector<double>& C, std::size_t K);

}  // namespace hades
