#include <cmath>

#include "bdlab/quad.hpp"
#include "doctest.h"

using namespace bdlab;
using quad::cplx;

TEST_CASE("oscillatory quadrature of a Fresnel-type integral with a closed form") {
    // integral over [0, 1] of e(L x) = (e(L) - 1) / (2 pi i L)
    for (double L : {3.0, 250.5, 1e5 + 0.25}) {
        auto amp = [](double) { return cplx(1.0, 0.0); };
        auto phase = [L](double x) { return L * x; };
        auto rate = [L](double) { return L; };
        auto r = quad::integrate_oscillatory(amp, phase, rate, 0.0, 1.0);
        cplx exact = (expi2pi(L) - 1.0) / (cplx(0, 2 * M_PI) * L);
        CHECK(r.converged);
        CHECK(std::abs(r.value - exact) < 1e-12 * std::max(1.0, r.scale));
    }
}

TEST_CASE("adaptive Gauss-Kronrod on a smooth integrand") {
    auto r = quad::integrate_adaptive([](double x) { return cplx(std::exp(-x * x), 0.0); }, 0.0, 5.0);
    CHECK(std::fabs(r.value.real() - 0.5 * std::sqrt(M_PI) * std::erf(5.0)) < 1e-13);
}

TEST_CASE("panel breaks respect the local wavelength") {
    quad::QuadOptions o;
    auto br = quad::panel_breaks([](double x) { return 10.0 + 100.0 * x; }, 0.0, 1.0, o);
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        double w = br[i + 1] - br[i];
        double rate = 10.0 + 100.0 * br[i + 1];
        CHECK(w * rate <= 1.0 + 1e-9);
    }
    auto fine = quad::refine_breaks(br);
    CHECK(fine.size() == 2 * br.size() - 1);
}

TEST_CASE("second derivative test holds with its explicit constant") {
    auto c = quad::check_second_derivative_test({100, 1000, 10000});
    CHECK(c.pass);
}

TEST_CASE("stationary phase scaling exponent") {
    auto c = quad::check_stationary_scaling({100, 400, 1600, 6400, 25600}, 0);
    CHECK(c.pass);
    CHECK(c.fitted_exponent == doctest::Approx(-0.5).epsilon(0.2));
}
