#include <cmath>
#include <vector>

#include "doctest.h"
#include "hades/rng.hpp"
#include "hades/ssm.hpp"

using namespace hades;

namespace {

HeadDiscretized random_head(Rng& r, std::size_t T, std::size_t N) {
    HeadDiscretized h;
    h.T = T;
    h.N = N;
    h.a.resize(T);
    h.delta.resize(T);
    h.Bbar.resize(T * N);
    h.C.resize(T * N);
    for (std::size_t t = 0; t < T; ++t) {
        h.delta[t] = 0.1 + r.next_double();
        h.a[t] = decay(h.delta[t], r.next_normal() * 0.5);
    }
    for (auto& v : h.Bbar) v = r.next_normal();
    for (auto& v : h.C) v = r.next_normal();
    h.D = r.next_normal();
    return h;
}

}  // namespace

TEST_CASE("softplus matches ln(1+exp) and is overflow safe") {
    for (double x : {-5.0, -0.3, 0.0, 0.7, 4.0})
        CHECK(softplus(x) == doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-14));
    CHECK(softplus(800.0) == doctest::Approx(800.0).epsilon(1e-14));
    CHECK(softplus(-800.0) == doctest::Approx(0.0));
}

TEST_CASE("decay lands strictly inside (0,1)") {
    for (double delta : {1e-3, 0.1, 1.0, 10.0})
        for (double al : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
            double a = decay(delta, al);
            CHECK(a > 0.0);
            CHECK(a < 1.0);
            CHECK(a == doctest::Approx(std::exp(-delta * std::exp(al))).epsilon(1e-14));
        }
}

TEST_CASE("scan of a tiny fixed head matches a frozen oracle") {
    HeadDiscretized h;
    h.T = 3;
    h.N = 2;
    h.a = {0.9, 0.8, 0.7};
    h.delta = {1, 1, 1};
    h.Bbar = {0.5, 0.1, 0.2, 0.3, 0.4, 0.4};
    h.C = {1, 0, 0, 1, 0.5, 0.5};
    h.D = 0.25;
    std::vector<double> x{1, -1, 2};
    auto y = scan_head(h, x, 1);
    REQUIRE(y.size() == 3);
    CHECK(y[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(-0.47).epsilon(1e-15));
    CHECK(y[2] == doctest::Approx(1.293).epsilon(1e-15));
}

TEST_CASE("scan equals the materialized filter matrix") {
    Rng r(11);
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t T = 1 + r.next_below(32);
        std::size_t N = 1 + r.next_below(8);
        std::size_t P = 1 + r.next_below(4);
        auto h = random_head(r, T, N);
        std::vector<double> x(T * P);
        for (auto& v : x) v = r.next_normal();
        auto y = scan_head(h, x, P);
        auto fm = materialize_matrix(h);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t p = 0; p < P; ++p) {
                double acc = 0.0;
                for (std::size_t s = 0; s <= t; ++s) acc += fm.at(t, s) * x[s * P + p];
                CHECK(y[t * P + p] == doctest::Approx(acc).epsilon(1e-10));
            }
    }
}

TEST_CASE("filter matrix is lower triangular with D on the diagonal skeleton") {
    Rng r(12);
    auto h = random_head(r, 6, 3);
    auto fm = materialize_matrix(h);
    for (std::size_t t = 0; t < 6; ++t)
        for (std::size_t s = t + 1; s < 6; ++s) CHECK(fm.at(t, s) == 0.0);
    // diagonal = C_t . (delta_t Bbar_t) + D
    for (std::size_t t = 0; t < 6; ++t) {
        double cb = 0.0;
        for (std::size_t n = 0; n < 3; ++n)
            cb += h.C[t * 3 + n] * h.delta[t] * h.Bbar[t * 3 + n];
        CHECK(fm.at(t, t) == doctest::Approx(cb + h.D).epsilon(1e-12));
    }
}

TEST_CASE("scan_head_with_states exposes the recurrence states") {
    Rng r(13);
    const std::size_t T = 5, N = 2, P = 3;
    auto h = random_head(r, T, N);
    std::vector<double> x(T * P);
    for (auto& v : x) v = r.next_normal();
    std::vector<double> states;
    auto y = scan_head_with_states(h, x, P, states);
    REQUIRE(states.size() == T * N * P);
    // replay the recurrence by hand
    std::vector<double> hh(N * P, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t p = 0; p < P; ++p)
                hh[n * P + p] = h.a[t] * hh[n * P + p] +
                                h.delta[t] * h.Bbar[t * N + n] * x[t * P + p];
        for (std::size_t i = 0; i < N * P; ++i)
            CHECK(states[t * N * P + i] == doctest::Approx(hh[i]).epsilon(1e-12));
        for (std::size_t p = 0; p < P; ++p) {
            double acc = h.D * x[t * P + p];
            for (std::size_t n = 0; n < N; ++n)
                acc += h.C[t * N + n] * hh[n * P + p];
            CHECK(y[t * P + p] == doctest::Approx(acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel_lti of a diagonal LTI system") {
    std::vector<double> adiag{0.5, 0.25};
    std::vector<double> B{1.0, 2.0};
    std::vector<double> C{3.0, 1.0};
    auto k = kernel_lti(adiag, B, C, 3);
    REQUIRE(k.size() == 4);
    // k[j] = sum_n C_n a_n^j B_n
    CHECK(k[0] == doctest::Approx(5.0));
    CHECK(k[1] == doctest::Approx(2.0));
    CHECK(k[2] == doctest::Approx(0.875));
    CHECK(k[3] == doctest::Approx(0.40625));
}

TEST_CASE("head validation rejects bad shapes and out-of-range decay") {
    HeadDiscretized h;
    h.T = 2;
    h.N = 1;
    h.a = {0.5, 1.5};  // out of (0,1)
    h.delta = {1, 1};
    h.Bbar = {1, 1};
    h.C = {1, 1};
    CHECK_THROWS(h.validate());
    h.a = {0.5, 0.5};
    CHECK_NOTHROW(h.validate());
    h.Bbar.pop_back();
    CHECK_THROWS(h.validate());
}
