#include "hades/svd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hades/tensor.hpp"

namespace hades {

std::vector<double> singular_values(const std::vector<double>& a,
                                    std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0 || a.size() != rows * cols) {
        throw std::invalid_argument("singular_values: bad shape");
    }
    check_finite(a, "singular_values input");

    // Work on the tall orientation so the Jacobi rotations act on the
    // smaller set of columns.
    std::size_t m = rows, n = cols;
    std::vector<double> w;
    if (rows >= cols) {
        w = a;
    } else {
        m = cols;
        n = rows;
        w.resize(a.size());
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) w[j * n + i] = a[i * cols + j];
    }

    const double tol = 1e-12;
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, g = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[i * n + p], wq = w[i * n + q];
                    alpha += wp * wp;
                    beta += wq * wq;
                    g += wp * wq;
                }
                if (std::abs(g) <= tol * std::sqrt(alpha * beta) || g == 0.0) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = ((zeta >= 0.0) ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[i * n + p], wq = w[i * n + q];
                    w[i * n + p] = c * wp - s * wq;
                    w[i * n + q] = s * wp + c * wq;
                }
            }
        }
        if (converged) break;
    }

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w[i * n + j] * w[i * n + j];
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

}  // namespace hades
