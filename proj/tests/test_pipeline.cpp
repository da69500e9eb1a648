#include <cmath>
#include <complex>
#include <random>

#include "bdlab/error.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/numtheory.hpp"
#include "bdlab/pipeline.hpp"
#include "doctest.h"

using namespace bdlab;
using namespace bdlab::pipeline;

namespace {

// direct complex Kloosterman sum
cplx kloosterman_direct(long n, long r, long p) {
    cplx s(0.0, 0.0);
    for (long a = 1; a < p; ++a) {
        long ab = nt::inv_mod(a, p);
        s += std::polar(1.0, 2.0 * M_PI * double(nt::mod(a * n + ab * r, p)) / double(p));
    }
    return s;
}

}  // namespace

TEST_CASE("Kloosterman sums are real, symmetric and obey the Weil bound") {
    std::mt19937_64 rng(99);
    auto primes = nt::primes_in(3, 200);
    std::uniform_int_distribution<size_t> pp(0, primes.size() - 1);
    std::uniform_int_distribution<long> nn(-5000, 5000);
    for (int i = 0; i < 100; ++i) {
        long p = primes[pp(rng)], n = nn(rng), r = nn(rng);
        cplx z = kloosterman_direct(n, r, p);
        CHECK(std::fabs(z.imag()) <= 1e-10);
        double k = kloosterman(n, r, p);
        CHECK(std::fabs(k - z.real()) < 1e-9);
        CHECK(std::fabs(k - kloosterman(r, n, p)) < 1e-9);
        KloostermanTable t(p);
        CHECK(std::fabs(t(n, r) - k) < 1e-9);
        if (nt::mod(n * r, p) != 0) CHECK(std::fabs(k) <= 2.0 * std::sqrt(double(p)) + 1e-9);
    }
    CHECK(kloosterman(0, 0, 7) == doctest::Approx(6.0));
    CHECK(kloosterman(7, 3, 7) == doctest::Approx(-1.0));
}

TEST_CASE("congruence splitting by exact modular arithmetic") {
    std::mt19937_64 rng(5);
    auto primes = nt::primes_in(50, 400);
    std::uniform_int_distribution<size_t> pp(0, primes.size() - 1);
    std::uniform_int_distribution<long> rr(1, 1000000);
    int done = 0;
    while (done < 50) {
        long p1 = primes[pp(rng)], p2 = primes[pp(rng)];
        long r1 = rr(rng), r2 = rr(rng);
        if (p1 == p2 || r1 % p1 == 0 || r2 % p2 == 0) continue;
        long q = p1 * p2;
        long n = nt::mod(nt::inv_mod(r1 % p1, p1) * p2 - nt::inv_mod(r2 % p2, p2) * p1, q);
        long nb1 = nt::inv_mod(n % p1, p1), nb2 = nt::inv_mod(n % p2, p2);
        CHECK(nt::mod(r1 - nb1 * p2, p1) == 0);
        CHECK(nt::mod(r2 + nb2 * p1, p2) == 0);
        ++done;
    }
}

TEST_CASE("phase reduced mod 1 in double-double") {
    PhaseSpec f(1e6, 0.3, 1000.0);
    for (double n : {1000.0, 1234.0, 1999.0}) {
        long double exact = 1e6L * -std::log((long double)n / 1000.0L) + 0.3L * n;
        long double fr = exact - std::floor(exact);
        double got = dd::frac(f.value_mod1(n));
        double d = std::fabs(double(fr) - got);
        CHECK(std::min(d, 1.0 - d) < 1e-9);
    }
}

TEST_CASE("pairing of phase and weight") {
    auto v = special::make_weight_v(20.0, 2.0);
    CHECK_NOTHROW(check_pairing(PhaseSpec(200, 0, 1000), v));
    CHECK_THROWS_AS(check_pairing(PhaseSpec(10, 0, 1000), v), PreconditionError);
    CHECK_NOTHROW(check_pairing(PhaseSpec(0, 0, 1000), v));
}

TEST_CASE("phase-free smooth sum is real for a self-dual form") {
    auto t = forms::coefficients_delta(5000);
    auto v = special::make_weight_v(20.0, 2.0);
    cplx s = s_direct(t, PhaseSpec(0, 0, 1000), v);
    CHECK(s.imag() == 0.0);
    CHECK_THROWS(s_direct(t, PhaseSpec(0, 0, 4000), v));
}

TEST_CASE("Voronoi identity for the level 1 form") {
    auto t = forms::coefficients_delta(40000);
    auto r = voronoi_check(t, 2, 5, 1000.0, 1.0);
    CHECK(r.truncated);
    CHECK(r.rel_diff < 1e-6);
    auto wrong = voronoi_check(t, 2, 5, 1000.0, -1.0);
    CHECK(wrong.rel_diff > 1.0);
}

TEST_CASE("J is negligible once the linear frequency leaves the window") {
    auto u = special::make_bump_u();
    auto v = special::make_weight_v(20.0, 2.0);
    auto vn = VNatural::make(v, u, 1.0, 1, 12);
    PhaseSpec f(1000, 0.0, 1000);
    double X = 50.0 * 50.0 * 1e4 / 1000.0;
    long p = 59;
    double scale = vn.abs_integral();
    for (double m : {1.0, 2.0}) {
        double r = std::round(m * 10.0 * f.T() * p / f.N());
        auto q = j_integral(1.5 * X, r, p, f, vn);
        CHECK(std::abs(q.value) <= 1e-8 * scale);
    }
}

TEST_CASE("Poisson in r is an identity and the truncated r-sum is stable") {
    auto u = special::make_bump_u();
    auto v = special::make_weight_v(20.0, 2.0);
    auto vn = VNatural::make(v, u, 1.0, 1, 12);
    PhaseSpec f(1000, 0.0, 1000);
    double P = 50, K = 100;
    double X = P * P * K * K / 1000.0;
    auto r = poisson_r_identity_check(long(1.5 * X), 59, f, vn, P);
    CHECK(r.rel_diff < 1e-5);
    CHECK(r.cap_stability < 1e-8);
    CHECK(r.cap_ok);
}

TEST_CASE("L engine requires primes above the level") {
    auto u = special::make_bump_u();
    auto v = special::make_weight_v(20.0, 2.0);
    auto vn = VNatural::make(v, u, -1.0, 11, 2);
    PhaseSpec f(400, 0.0, 1000);
    std::vector<LFamilyMember> fam{{7, 3}};
    CHECK_THROWS_AS(LEngine(f, vn, 40, 5, 11, fam), PreconditionError);
}

TEST_CASE("strict decomposition names the failing inequality") {
    auto t = forms::coefficients_delta(20000);
    auto v = special::make_weight_v(20.0, 2.0);
    auto u = special::make_bump_u();
    DecompositionOptions o;
    o.strict = true;
    try {
        s_decomposed(t, PhaseSpec(1000, 0, 1000), v, 20, 50, u, o);
        FAIL("expected a hypothesis error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("N < X") != std::string::npos);
    }
}

TEST_CASE("bound ledger: split counting equals enumeration") {
    auto t = forms::coefficients_delta(5000);
    for (double T : {500.0, 1000.0, 2000.0}) {
        auto b = bound_ledger(t, 1000, T, 0.0);
        REQUIRE(b.s_off_sq_brute >= 0);
        CHECK(std::fabs(b.s_off_sq_brute - b.s_off_sq_split) <= 1e-9 * b.s_off_sq_brute);
    }
    auto g = bound_ledger(t, 1000, 1000, 0.37);
    CHECK(std::fabs(g.s_off_sq_brute - g.s_off_sq_split) <= 1e-9 * g.s_off_sq_brute);
}
