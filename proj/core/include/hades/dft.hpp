#pragma once

#include <cstddef>
#include <vector>

namespace hades {

struct ComplexVector {
    std::vector<double> re;
    std::vector<double> im;

    std::size_t size() const { return re.size(); }
    double magnitude(std::size_t k) const;
};

// DFT of a real vector: X[k] = sum_t x[t] exp(-2*pi*i*k*t/n).
// Naive O(n^2) in double precision; power-of-two lengths take a radix-2
// fast path that agrees with the naive sum.
ComplexVector dft(const std::vector<double>& x);

// Forced naive evaluation, kept public so tests can use it as an oracle.
ComplexVector dft_naive(const std::vector<double>& x);

}  // namespace hades
