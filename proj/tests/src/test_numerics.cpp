#include <cmath>
#include <vector>

#include "doctest.h"
#include "hades/dft.hpp"
#include "hades/rng.hpp"
#include "hades/svd.hpp"
#include "hades/tensor.hpp"

using namespace hades;

TEST_CASE("rng stream is frozen") {
    Rng r(42);
    CHECK(r.next_u64() == 5592132763777985307ULL);
    CHECK(r.next_u64() == 9129838320742759465ULL);
    CHECK(r.next_u64() == 2139811525164838579ULL);
    Rng d(42);
    CHECK(d.next_double() == doctest::Approx(0.30315012456577295).epsilon(1e-15));
    Rng n(42);
    CHECK(n.next_normal() == doctest::Approx(-1.5442254637540294).epsilon(1e-12));
    CHECK(n.next_normal() == doctest::Approx(0.04921369944568145).epsilon(1e-12));
}

TEST_CASE("rng split gives an independent frozen stream") {
    Rng s = Rng(42).split(7);
    CHECK(s.next_u64() == 1494194372591352907ULL);
    // split must not disturb the parent
    Rng a(42);
    Rng b(42);
    (void)b.split(3);
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng next_below stays in range and covers values") {
    Rng r(1);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 2000; ++i) seen[r.next_below(7)]++;
    for (int v : seen) CHECK(v > 0);
}

TEST_CASE("dft magnitudes match a frozen oracle") {
    std::vector<double> x{1, 2, 3, 4, 0, -1, -2, 5};
    auto X = dft(x);
    const double want[8] = {12.0, 7.4698721457079396, 8.0, 4.0250478415512863,
                            8.0, 4.0250478415512863, 8.0, 7.4698721457079396};
    REQUIRE(X.size() == 8);
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(X.magnitude(k) == doctest::Approx(want[k]).epsilon(1e-12));
}

TEST_CASE("fast dft agrees with the naive sum") {
    Rng r(9);
    for (std::size_t n : {8u, 16u, 64u, 256u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = r.next_normal();
        auto a = dft(x);
        auto b = dft_naive(x);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(a.re[k] - b.re[k]));
            worst = std::max(worst, std::abs(a.im[k] - b.im[k]));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("dft of a pure sinusoid concentrates in its bin") {
    const std::size_t n = 64, k0 = 5;
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t)
        x[t] = std::cos(2.0 * M_PI * double(k0) * double(t) / double(n));
    auto X = dft(x);
    CHECK(X.magnitude(k0) == doctest::Approx(n / 2.0).epsilon(1e-9));
    for (std::size_t k = 0; k < n; ++k)
        if (k != k0 && k != n - k0) CHECK(std::abs(X.magnitude(k)) < 1e-9);
}

TEST_CASE("singular values of a fixed 3x2 matrix") {
    std::vector<double> a{1, 2, 3, 4, 5, 6};
    auto sv = singular_values(a, 3, 2);
    REQUIRE(sv.size() == 2);
    CHECK(sv[0] == doctest::Approx(9.5255180915651056).epsilon(1e-12));
    CHECK(sv[1] == doctest::Approx(0.51430058065864426).epsilon(1e-12));
}

TEST_CASE("singular values: identity and Frobenius consistency") {
    std::vector<double> eye(16, 0.0);
    for (int i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
    auto sv = singular_values(eye, 4, 4);
    for (double s : sv) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));

    Rng r(4);
    std::vector<double> m(5 * 3);
    double fro = 0.0;
    for (auto& v : m) { v = r.next_normal(); fro += v * v; }
    auto s = singular_values(m, 5, 3);
    double sum = 0.0;
    for (double v : s) sum += v * v;
    CHECK(sum == doctest::Approx(fro).epsilon(1e-10));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i - 1] >= s[i]);
}

TEST_CASE("check_finite rejects NaN and Inf") {
    std::vector<double> ok{1.0, -2.0};
    CHECK_NOTHROW(check_finite(ok, "ok"));
    std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS(check_finite(bad, "bad"));
    CHECK_THROWS(check_finite(std::numeric_limits<double>::infinity(), "inf"));
}

TEST_CASE("matvec_rowmajor multiplies x * W") {
    std::vector<double> x{1, 2};
    std::vector<double> W{1, 2, 3, 4, 5, 6};  // 2x3
    std::vector<double> y(3);
    matvec_rowmajor(x.data(), W.data(), y.data(), 2, 3);
    CHECK(y[0] == doctest::Approx(9.0));
    CHECK(y[1] == doctest::Approx(12.0));
    CHECK(y[2] == doctest::Approx(15.0));
}
