#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hades {

// Row-major dense tensor of doubles. Shapes are explicit; most hot loops in
// the library work on raw vectors with dimensions passed alongside, and use
// Tensor at module boundaries.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel(shape), 0.0);
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }
    std::size_t size() const { return data.size(); }
};

// Throws if any entry is NaN/Inf; `what` names the offending tensor.
void check_finite(const std::vector<double>& v, const std::string& what);
void check_finite(double x, const std::string& what);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// y = x * W for row-vector x (len in) and W (in x out, row-major).
void matvec_rowmajor(const double* x, const double* W, double* y,
                     std::size_t in, std::size_t out);

}  // namespace hades
