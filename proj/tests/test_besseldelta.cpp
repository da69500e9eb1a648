#include <cmath>

#include "bdlab/besseldelta.hpp"
#include "bdlab/special.hpp"
#include "doctest.h"

using namespace bdlab;
using namespace bdlab::besseldelta;

TEST_CASE("Weber identity on two small samples") {
    CHECK(weber_identity_check(0.1, 0.1, 10, 12).rel_diff < 1e-8);
    CHECK(weber_identity_check(0.1, 0.2, 10, 12).rel_diff < 1e-8);
    CHECK(weber_identity_check(1.0, 1.0, 50, 2).rel_diff < 1e-8);
}

TEST_CASE("diagonal integral approaches its main term") {
    auto u = special::make_bump_u();
    auto r = verify_diagonal_asymptotic(12, u, 1.0, {1e3, 4e3, 1.6e4});
    CHECK(r.pass);
    CHECK(r.exponent == doctest::Approx(0.25).epsilon(0.4));
}

TEST_CASE("integral decays off the diagonal") {
    auto u = special::make_bump_u();
    double X = 1e4;
    double b = 1.0 + 10.0 * std::pow(X, 0.05) / std::sqrt(X) * 2.0;
    auto r = verify_offdiagonal_decay(12, u, 1.0, b, X);
    CHECK(r.pass);
    CHECK(r.relative <= 1e-8);
}

TEST_CASE("conjugate sign flips the integral to its conjugate") {
    auto u = special::make_bump_u();
    auto p = bessel_integral_I(0.5, 0.7, 1e4, 12, u);
    auto m = bessel_integral_I(0.5, 0.7, 1e4, 12, u, {}, -1);
    // J is real, so the two signs give conjugate integrals
    CHECK(std::abs(p.value - std::conj(m.value)) < 1e-9 * std::max(1.0, p.scale));
}

TEST_CASE("delta identity: zero off the congruence, close to 1 on the diagonal") {
    auto u = special::make_bump_u();
    DeltaParams P(31, 1000, 1e5, 12, u);
    CHECK(delta_identity(1000, 1001, P).value == cplx(0.0, 0.0));
    auto d = delta_identity(1000, 1000, P);
    double scale = 31.0 / std::sqrt(1000.0 * 1e5);
    CHECK(std::abs(d.value - 1.0) <= 10.0 * scale);
    auto o = delta_identity(1000, 1031, P);
    CHECK(std::abs(o.value) <= std::max(10.0 * scale, 1e-6));
}

TEST_CASE("Hankel inversion recovers a smooth bump") {
    auto F = [](double a) { return a > 1 && a < 2 ? std::exp(-1 / ((a - 1) * (2 - a))) : 0.0; };
    auto h = hankel_inversion_check(F, {0.5, 1.5, 2.5}, 12, 100.0);
    CHECK(h.max_residual < 1e-3);
}
