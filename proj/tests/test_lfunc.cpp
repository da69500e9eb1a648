#include <cmath>

#include "bdlab/error.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/lfunc.hpp"
#include "doctest.h"

using namespace bdlab;
using namespace bdlab::lfunc;

namespace {

forms::CoefficientTable delta_table() {
    static auto t = forms::coefficients_delta(60000).with_eta(1.0);
    return t;
}

}  // namespace

TEST_CASE("analytic conductor") {
    auto d = forms::descriptor_delta();
    CHECK(analytic_conductor(d, 0) == doctest::Approx(42.0 / (4 * M_PI * M_PI)).epsilon(1e-15));
    CHECK(analytic_conductor(d, 37.5) == analytic_conductor(d, -37.5));
    auto e = forms::descriptor_11a();
    double expect = 11.0 / (4 * M_PI * M_PI) * std::hypot(1.0, 100.0) * std::hypot(2.0, 100.0);
    CHECK(analytic_conductor(e, 100) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("smoothed cutoff satisfies F(x) + F(1/x) = 1") {
    auto F = cutoff_literal();
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 100.0}) CHECK(F.F(x) + F.F(1.0 / x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(F.F(1e-3) == 1.0);
    CHECK(F.F(1e3) == 0.0);
}

TEST_CASE("central value of Delta") {
    auto p = afe_lvalue(delta_table(), 0.0);
    CHECK(p.value.real() == doctest::Approx(0.792122838646).epsilon(1e-11));
    CHECK(std::fabs(p.value.imag()) < 1e-12);
}

TEST_CASE("two cutoffs agree and L(-t) is the conjugate of L(t)") {
    auto t = delta_table();
    for (double h : {16.0, 50.0}) {
        auto a = afe_lvalue(t, h, cutoff_f1());
        auto b = afe_lvalue(t, h, cutoff_f2());
        CHECK(std::abs(a.value - b.value) <= 1e-6 * std::abs(a.value));
        auto m = afe_lvalue(t, -h, cutoff_f1());
        CHECK(std::abs(m.value - std::conj(a.value)) <= 1e-8);
    }
}

TEST_CASE("functional equation machinery matches the Dirichlet series at s = 2 + it") {
    auto c = dirichlet_check(delta_table(), 20.0);
    CHECK(c.rel_diff < 1e-8);
}

TEST_CASE("uncalibrated eta and short tables are rejected") {
    auto raw = forms::coefficients_delta(60000);
    CHECK_THROWS_AS(afe_lvalue(raw, 10.0), PreconditionError);
    auto small = forms::coefficients_delta(50).with_eta(1.0);
    try {
        afe_lvalue(small, 100.0);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("n_max") != std::string::npos);
    }
}

TEST_CASE("weyl scan returns finite values for the level 11 form") {
    auto t = forms::coefficients_11a(20000).with_eta(-1.0);
    WeylScanOptions o;
    o.t_grid = {16, 32, 64};
    o.block_points = 3;
    o.s_blocks = false;
    REQUIRE(weyl_required_n_max(t.descriptor(), o) <= t.n_max());
    auto r = weyl_scan(t, o);
    CHECK(r.rows.size() > 0);
    CHECK(std::isfinite(r.alpha));
    CHECK(r.max_cutoff_rel_diff < 1e-5);
}
