#include "hades/dft.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "hades/tensor.hpp"

namespace hades {

double ComplexVector::magnitude(std::size_t k) const {
    return std::hypot(re[k], im[k]);
}

ComplexVector dft_naive(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft: empty input");
    ComplexVector out;
    out.re.assign(n, 0.0);
    out.im.assign(n, 0.0);
    const double w = -2.0 * M_PI / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            // reduce k*t mod n before the trig call to keep the angle small
            const double ang = w * static_cast<double>((k * t) % n);
            re += x[t] * std::cos(ang);
            im += x[t] * std::sin(ang);
        }
        out.re[k] = re;
        out.im[k] = im;
    }
    return out;
}

namespace {

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

ComplexVector dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft: empty input");
    check_finite(x, "dft input");
    if (n >= 2 && (n & (n - 1)) == 0) {
        std::vector<std::complex<double>> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = x[i];
        fft_radix2(a);
        ComplexVector out;
        out.re.resize(n);
        out.im.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.re[i] = a[i].real();
            out.im[i] = a[i].imag();
        }
        return out;
    }
    return dft_naive(x);
}

}  // namespace hades
