#include "hades/tensor.hpp"

#include <cmath>

namespace hades {

void check_finite(const std::vector<double>& v, const std::string& what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::runtime_error("non-finite value in " + what);
        }
    }
}

void check_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) {
        throw std::runtime_error("non-finite value in " + what);
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void matvec_rowmajor(const double* x, const double* W, double* y,
                     std::size_t in, std::size_t out) {
    for (std::size_t j = 0; j < out; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < in; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = W + i * out;
        for (std::size_t j = 0; j < out; ++j) y[j] += xi * row[j];
    }
}

}  // namespace hades
