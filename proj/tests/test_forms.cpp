#include <random>

#include "bdlab/error.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/numtheory.hpp"
#include "doctest.h"

using namespace bdlab;
using forms::i128;

TEST_CASE("tau from two independent q-expansions") {
    auto a = forms::tau_by_pentagonal(1000);
    auto b = forms::tau_by_dense_product(1000);
    CHECK(a == b);
    CHECK(a[1] == 1);
    CHECK(a[2] == -24);
    CHECK(a[11] == 534612);
}

TEST_CASE("level 11 coefficients by point counting match the eta product") {
    auto t = forms::coefficients_11a(1000);
    auto e = forms::eta_product_11a(1000);
    for (long n = 1; n <= 1000; ++n) REQUIRE(t.raw(n) == e[n]);
    CHECK(forms::ap_11a(2) == -2);
    CHECK(forms::ap_11a(3) == -1);
}

TEST_CASE("Hecke relations") {
    auto d = forms::coefficients_delta(200);
    CHECK(d.raw(4) == d.raw(2) * d.raw(2) - (i128(1) << 11));
    CHECK(d.raw(12) == d.raw(4) * d.raw(3));
    auto t = forms::coefficients_11a(200);
    CHECK(t.raw(121) == t.raw(11) * t.raw(11));
    CHECK(t.lambda(1) == 1.0);
}

TEST_CASE("multiplicativity on random coprime pairs") {
    auto d = forms::coefficients_delta(20000);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<long> dist(2, 140);
    int done = 0;
    while (done < 200) {
        long m = dist(rng), n = dist(rng);
        if (nt::gcd(m, n) != 1) continue;
        CHECK(d.raw(m * n) == d.raw(m) * d.raw(n));
        CHECK(std::fabs(d.lambda(m * n) - d.lambda(m) * d.lambda(n)) < 1e-12 * (1 + std::fabs(d.lambda(m * n))));
        ++done;
    }
}

TEST_CASE("Deligne bound and mean square band") {
    for (const char* label : {"delta", "11a"}) {
        auto r = forms::ramanujan_report(forms::coefficients_by_label(label, 10000));
        CHECK(r.max_ratio <= 1.0 + 1e-12);
        REQUIRE(!r.mean_square.empty());
        for (double m : r.mean_square) {
            CHECK(m > 0.01);
            CHECK(m < 100.0);
        }
    }
}

TEST_CASE("hecke_extend names a missing prime") {
    std::map<long, i128> pv{{2, -24}, {3, 252}};
    CHECK_THROWS_AS(forms::hecke_extend(pv, 1, 12, 10, forms::descriptor_delta()), PreconditionError);
}

TEST_CASE("unknown label is rejected") {
    CHECK_THROWS(forms::coefficients_by_label("37a", 100));
}
