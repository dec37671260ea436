#include "hades/ssm.hpp"

#include <cmath>
#include <stdexcept>

#include "hades/tensor.hpp"

namespace hades {

void HeadDiscretized::validate() const {
    if (a.size() != T || delta.size() != T || Bbar.size() != T * N ||
        C.size() != T * N) {
        throw std::invalid_argument("HeadDiscretized: inconsistent shapes");
    }
    for (double v : a) {
        if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("HeadDiscretized: a out of (0,1)");
    }
    for (double v : delta) {
        if (!(v > 0.0)) throw std::invalid_argument("HeadDiscretized: delta <= 0");
    }
    check_finite(Bbar, "HeadDiscretized.Bbar");
    check_finite(C, "HeadDiscretized.C");
}

double softplus(double x) {
    if (x > 20.0) return x;
    if (x < -20.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double decay(double delta, double a_log) {
    if (!(delta > 0.0)) throw std::invalid_argument("decay: delta must be positive");
    return std::exp(-delta * std::exp(a_log));
}

std::vector<double> scan_head_with_states(const HeadDiscretized& disc,
                                          const std::vector<double>& x,
                                          std::size_t P,
                                          std::vector<double>& states) {
    const std::size_t T = disc.T, N = disc.N;
    if (x.size() != T * P) throw std::invalid_argument("scan_head: x shape mismatch");
    std::vector<double> h(N * P, 0.0);
    std::vector<double> y(T * P, 0.0);
    states.assign(T * N * P, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const double at = disc.a[t];
        const double dt = disc.delta[t];
        const double* Bt = &disc.Bbar[t * N];
        const double* Ct = &disc.C[t * N];
        const double* xt = &x[t * P];
        for (std::size_t n = 0; n < N; ++n) {
            const double w = dt * Bt[n];
            double* hn = &h[n * P];
            for (std::size_t p = 0; p < P; ++p) hn[p] = at * hn[p] + w * xt[p];
        }
        double* st = &states[t * N * P];
        for (std::size_t i = 0; i < N * P; ++i) st[i] = h[i];
        double* yt = &y[t * P];
        for (std::size_t n = 0; n < N; ++n) {
            const double c = Ct[n];
            const double* hn = &h[n * P];
            for (std::size_t p = 0; p < P; ++p) yt[p] += c * hn[p];
        }
        for (std::size_t p = 0; p < P; ++p) yt[p] += disc.D * xt[p];
    }
    return y;
}

std::vector<double> scan_head(const HeadDiscretized& disc,
                              const std::vector<double>& x, std::size_t P) {
    std::vector<double> states;
    return scan_head_with_states(disc, x, P, states);
}

FilterMatrix materialize_matrix(const HeadDiscretized& disc) {
    const std::size_t T = disc.T, N = disc.N;
    FilterMatrix fm;
    fm.T = T;
    fm.entries.assign(T * T, 0.0);
    // Column s carries delta_s * Bbar_s decayed forward; the decay product
    // runs over i in (s, t], which is what the recurrence induces.
    std::vector<double> wcol(N);
    for (std::size_t s = 0; s < T; ++s) {
        for (std::size_t n = 0; n < N; ++n) wcol[n] = disc.delta[s] * disc.Bbar[s * N + n];
        double prod = 1.0;
        for (std::size_t t = s; t < T; ++t) {
            if (t > s) prod *= disc.a[t];
            double e = 0.0;
            for (std::size_t n = 0; n < N; ++n) e += disc.C[t * N + n] * wcol[n];
            fm.entries[t * T + s] = e * prod;
        }
    }
    for (std::size_t t = 0; t < T; ++t) fm.entries[t * T + t] += disc.D;
    return fm;
}

std::vector<double> kernel_lti(const std::vector<double>& adiag,
                               const std::vector<double>& B,
                               const std::vector<double>& C, std::size_t K) {
    const std::size_t N = adiag.size();
    if (B.size() != N || C.size() != N) throw std::invalid_argument("kernel_lti: shape mismatch");
    std::vector<double> k(K + 1, 0.0);
    std::vector<double> apow(N, 1.0);
    for (std::size_t j = 0; j <= K; ++j) {
        double v = 0.0;
        for (std::size_t n = 0; n < N; ++n) v += C[n] * apow[n] * B[n];
        k[j] = v;
        for (std::size_t n = 0; n < N; ++n) apow[n] *= adiag[n];
    }
    return k;
}

}  // namespace hades
