#include <cmath>

#include "bdlab/dd.hpp"
#include "bdlab/special.hpp"
#include "doctest.h"

using namespace bdlab;
using special::cplx;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

struct Ref {
    int n;
    double x, v;
};

// mpmath, 40 digits
const Ref j_refs[] = {
    {0, 0.5, 0.93846980724081290423},     {1, 1.0, 0.44005058574493351596},
    {11, 5.0, 0.00035092744976620901015}, {11, 19.9, 0.045848184543023616682},
    {11, 20.1, 0.076360353646753862672},  {11, 25.0, -0.16823599003225700956},
    {11, 100.0, 0.052290326018936484163}, {30, 50.0, 0.048434257245509417485},
    {64, 100.0, 0.039985069452918338196}, {11, 1000.0, -0.0062061716181024621873},
    {1, 1e6, -0.00072596835681376304185}, {11, 1e9, 5.2104211603055552448e-6},
    {64, 70.0, 0.099019233739506266453},  {0, 1e4, -0.0070961603533888014773},
};

}  // namespace

TEST_CASE("double-double products and sums are exact to about 1e-32") {
    DD a = two_prod(1.0 + 1e-10, 1.0 - 1e-10);
    CHECK(a.hi == 1.0);
    CHECK(a.lo == doctest::Approx(-1e-20).epsilon(1e-6));
    DD third = DD(1.0) / DD(3.0);
    DD back = third * 3.0 - 1.0;
    CHECK(std::fabs(back.to_double()) < 1e-31);
    DD e = dd::exp(dd::log(DD(12345.678)));
    CHECK(std::fabs((e - 12345.678).to_double()) < 1e-26);
}

TEST_CASE("expi2pi reduces large arguments in double-double") {
    DD x = DD(1e12) + DD(0.25);
    auto z = expi2pi(x);
    CHECK(std::fabs(z.real()) < 1e-15);
    CHECK(z.imag() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bessel J against high-precision references") {
    for (const auto& r : j_refs) {
        CAPTURE(r.n);
        CAPTURE(r.x);
        CHECK(rel(special::bessel_j(r.n, r.x), r.v) < 1e-12);
    }
}

TEST_CASE("series and asymptotic branches agree near the handover") {
    for (int nu : {1, 11}) {
        double x = special::bessel_handover(nu);
        double a = special::bessel_j_series(nu, x);
        double err = 0.0;
        double b = special::bessel_j_asymptotic(nu, x, &err);
        CHECK(std::fabs(a - b) < 1e-13);
        CHECK(err < 1e-13);
    }
}

TEST_CASE("bessel recurrence J_{n-1} + J_{n+1} = 2n/x J_n") {
    for (double x : {3.0, 17.0, 150.0, 4000.0}) {
        for (int n = 1; n < 40; n += 7) {
            double lhs = special::bessel_j(n - 1, x) + special::bessel_j(n + 1, x);
            double rhs = 2.0 * n / x * special::bessel_j(n, x);
            CHECK(std::fabs(lhs - rhs) < 1e-13 * (1.0 + std::fabs(rhs)) + 1e-15);
        }
    }
}

TEST_CASE("scaled modified Bessel I") {
    CHECK(rel(special::bessel_i_scaled(11, 5.0), 6.7079034374726758039e-6) < 1e-13);
    CHECK(rel(special::bessel_i_scaled(11, 50.0), 0.016744525656934678897) < 1e-13);
    CHECK(rel(special::bessel_i_scaled(64, 500.0), 0.00029738030925827466136) < 1e-13);
}

TEST_CASE("log Gamma on the principal branch") {
    auto near = [](cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)) < 1e-14; };
    CHECK(near(special::log_gamma({5, 30}), {-30.883004541385086391, 78.769617695308664998}));
    CHECK(near(special::log_gamma({6, 10000}), {-15656.387457094892539, 82112.041591225940956}));
    CHECK(near(special::log_gamma({0.5, 0}), {0.57236494292470008707, 0}));
    CHECK(near(special::log_gamma({6.5, -200}), {-281.449529113789663, -868.99847291182317358}));
}

TEST_CASE("Gamma ratio satisfies Gamma(s+1)/Gamma(s) = s") {
    for (cplx s : {cplx(0.75, 3.0), cplx(6.25, -400.0), cplx(1.5, 1000.0)}) {
        cplx r = special::gamma_ratio(s + 1.0, s);
        CHECK(std::abs(r - s) / std::abs(s) < 1e-13);
    }
}

TEST_CASE("bump U and its Mellin transform") {
    auto u = special::make_bump_u();
    CHECK(u(1.0) == 0.0);
    CHECK(u(2.0) == 0.0);
    CHECK(rel(u(1.5), 0.018315638888734180294) < 1e-15);
    CHECK(rel(u.integral(), 0.0070298584066096562392) < 1e-13);
    CHECK(rel(u.mellin_three_quarters(), 0.0063607386314564507071) < 1e-13);
    cplx a = special::mellin_u(u, cplx(0.5, 7.0));
    cplx b = special::mellin_u_panels(u, cplx(0.5, 7.0), 128);
    CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("weight V is 1 in the middle and vanishes outside") {
    auto v = special::make_weight_v(20.0, 2.0);
    CHECK(v(1.5) == doctest::Approx(1.0));
    CHECK(v(0.99) == 0.0);
    CHECK(v(2.01) == 0.0);
    double h = 1e-6, x = 1.02;
    CHECK(v.d1(x) == doctest::Approx((v(x + h) - v(x - h)) / (2 * h)).epsilon(1e-5));
}
