#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bdlab/app.hpp"
#include "bdlab/besseldelta.hpp"
#include "bdlab/cache.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/lfunc.hpp"
#include "bdlab/parallel.hpp"
#include "bdlab/pipeline.hpp"
#include "bdlab/quad.hpp"

using namespace bdlab;
using cplx = std::complex<double>;

namespace {

struct Line {
    int id;
    bool pass;
    std::string text;
};

std::vector<Line> lines;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

void report(int id, bool pass, const std::string& text) {
    std::fprintf(stderr, "[done %d]\n", id);
    lines.push_back({id, pass, text});
}

void guarded(int id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

const special::BumpU& bump() {
    static special::BumpU u = special::make_bump_u();
    return u;
}

forms::CoefficientTable delta_t, t11;
cplx eta_delta{0, 0}, eta_11{0, 0};

}  // namespace

int main() {
    set_threads(0);
    auto t_all = std::chrono::steady_clock::now();
    delta_t = forms::coefficients_delta(200000);
    t11 = forms::coefficients_11a(200000);

    // 2: eta calibration, both forms, two moduli each
    guarded(2, [] {
        bool ok = true;
        std::string detail;
        for (auto [t, cs, eta] : {std::tuple{&delta_t, std::vector<long>{5, 7}, &eta_delta},
                                  std::tuple{&t11, std::vector<long>{7, 13}, &eta_11}}) {
            std::vector<cplx> found;
            for (long c : cs) {
                auto e = pipeline::calibrate_eta(*t, c, 1000.0);
                double ratio = e.loser_residual / e.winner_residual;
                ok = ok && e.winner_residual < 1e-6 && ratio > 10;
                found.push_back(e.eta);
                detail += f("%s c=%ld eta=%+.0f winner %.1e ratio %.1e; ", t->descriptor().label.c_str(), c,
                            e.eta.real(), e.winner_residual, ratio);
            }
            ok = ok && found[0] == found[1];
            *eta = found[0];
        }
        report(2, ok, "eta calibration: " + detail + "(winner < 1e-6, ratio > 10, stable)");
    });

    // 1: Voronoi identity, bump on [1e3, 2e3]
    guarded(1, [] {
        double worst = 0, slowest = 0;
        bool ok = true;
        for (auto [t, cs, eta] : {std::tuple{&delta_t, std::vector<long>{5, 7}, eta_delta},
                                  std::tuple{&t11, std::vector<long>{7, 13}, eta_11}}) {
            for (long c : cs) {
                auto t0 = std::chrono::steady_clock::now();
                auto r = pipeline::voronoi_check(*t, 1, c, 1000.0, eta == cplx(0, 0) ? cplx(1, 0) : eta);
                double s = seconds_since(t0);
                worst = std::max(worst, r.rel_diff);
                slowest = std::max(slowest, s);
                ok = ok && r.truncated && r.rel_diff <= 1e-6 && s <= 30;
            }
        }
        report(1, ok, f("Voronoi identity, 4 cases: max rel residual %.2e (tol 1e-6), slowest case %.1f s (limit 30 s)",
                        worst, slowest));
    });

    // 3: diagonal asymptotic
    guarded(3, [] {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<double> X;
        for (int j = 0; j <= 6; ++j) X.push_back(1e3 * std::ldexp(1.0, j));
        bool ok = true;
        std::string detail;
        for (double a : {1.0, 2.0}) {
            auto r = besseldelta::verify_diagonal_asymptotic(12, bump(), a, X);
            ok = ok && std::fabs(r.exponent - 0.25) <= 0.1 && r.max_constant <= 100;
            detail += f("a=%g exponent %.4f C %.2e; ", a, r.exponent, r.max_constant);
        }
        double s = seconds_since(t0);
        ok = ok && s <= 120;
        report(3, ok, "diagonal asymptotic: " + detail + f("(0.25 +- 0.1, C <= 100) %.1f s (limit 120 s)", s));
    });

    // 4: off-diagonal decay, 20 configurations with separation >= 10 X^0.05
    guarded(4, [] {
        const double as[] = {0.5, 1.0, 1.5, 2.0, 3.0};
        const double ms[] = {1.0, 2.0, 4.0, 8.0};
        std::vector<double> rel(20);
        parallel_for(20, [&](long i) {
            double a = as[i / 4], X = (i % 2) ? 1e5 : 1e4;
            double b = a + ms[i % 4] * 10.0 * std::pow(X, 0.05) / std::sqrt(X);
            rel[i] = std::abs(besseldelta::bessel_integral_I(a, b, X, 12, bump()).value) / X;
        });
        double worst = *std::max_element(rel.begin(), rel.end());
        report(4, worst <= 1e-8, f("off-diagonal decay, 20 configurations: max |I|/X %.2e (tol 1e-8)", worst));
    });

    // 5: Weber identity, 10 samples
    guarded(5, [] {
        struct W {
            double a, b, X;
            int k;
        };
        const W ws[] = {{0.1, 0.1, 10, 12},  {0.1, 0.2, 10, 12},    {0.3, 0.32, 100, 12}, {1, 1, 50, 2},
                        {0.5, 0.55, 200, 12}, {0.2, 0.25, 1000, 12}, {1, 1.2, 30, 2},     {0.4, 0.5, 100, 2},
                        {1.5, 1.6, 20, 4},    {0.25, 0.3, 500, 6}};
        double worst = 0;
        for (const auto& w : ws) worst = std::max(worst, besseldelta::weber_identity_check(w.a, w.b, w.X, w.k).rel_diff);
        report(5, worst <= 1e-8, f("Weber identity, 10 samples: max rel diff %.2e (tol 1e-8)", worst));
    });

    // 6: delta identity on a 50 x 50 grid
    guarded(6, [] {
        auto t0 = std::chrono::steady_clock::now();
        const long p = 31;
        const double N = 1000, X = 1e5;
        besseldelta::DeltaParams P(p, N, X, 12, bump());
        const int G = 50;
        std::vector<cplx> v(G * G);
        parallel_for(G * G, [&](long k) {
            v[k] = besseldelta::delta_identity(1000 + 20 * (k / G), 1000 + 20 * (k % G), P).value;
        });
        double scale = p / std::sqrt(N * X), cd = 0, off = 0;
        for (int i = 0; i < G; ++i)
            for (int j = 0; j < G; ++j) {
                if (i == j) cd = std::max(cd, std::abs(v[i * G + j] - 1.0) / scale);
                else off = std::max(off, std::abs(v[i * G + j]));
            }
        double s = seconds_since(t0);
        bool ok = cd <= 10 && off <= std::max(cd * scale, 1e-6) && s <= 300;
        report(6, ok, f("delta identity 50x50 (N=1e3, p=31, X=1e5): diagonal C %.2f (<= 10), off-diagonal max %.2e "
                        "(<= max(C p/sqrt(NX), 1e-6) = %.2e), %.1f s (limit 300 s)",
                        cd, off, std::max(cd * scale, 1e-6), s));
    });

    // 7: decomposition at N=1e3, T=200, K=20, P=50
    guarded(7, [] {
        auto t0 = std::chrono::steady_clock::now();
        auto v = special::make_weight_v(20, 2.0);
        auto d = pipeline::s_decomposed(delta_t.with_eta(eta_delta), pipeline::PhaseSpec(200, 0, 1000), v, 20, 50, bump());
        double s = seconds_since(t0);
        std::string viol;
        for (auto& x : d.violations) viol += " [" + x + "]";
        report(7, d.ratio <= 10 && s <= 900,
               f("decomposition: residual %.3e, envelope %.3e, ratio %.3f (<= 10), X=%g, %.1f s (limit 900 s); "
                 "recorded hypothesis violations:",
                 d.residual, d.envelope, d.ratio, d.X, s) +
                   (viol.empty() ? " none" : viol));
    });

    // 8: Poisson in r, 5 configurations
    guarded(8, [] {
        auto v = special::make_weight_v(20, 2.0);
        auto vn = pipeline::VNatural::make(v, bump(), eta_delta, 1, 12);
        struct PC {
            double T, gamma;
            long p;
            double nfrac;
            pipeline::PhiKind kind;
        };
        const PC pcs[] = {{1000, 0.0, 59, 1.5, pipeline::PhiKind::neg_log},
                          {1000, 0.0, 67, 1.2, pipeline::PhiKind::neg_log},
                          {500, 0.25, 61, 1.5, pipeline::PhiKind::neg_log},
                          {1000, 0.0, 71, 1.7, pipeline::PhiKind::power},
                          {800, 0.5, 89, 1.4, pipeline::PhiKind::neg_log}};
        double worst = 0;
        for (const auto& c : pcs) {
            pipeline::PhaseSpec ph(c.T, c.gamma, 1000, c.kind, c.kind == pipeline::PhiKind::power ? 1.5 : 0.0);
            double K = std::pow(c.T, 2.0 / 3.0), X = 2500.0 * K * K / 1000.0;
            auto r = pipeline::poisson_r_identity_check(long(c.nfrac * X), c.p, ph, vn, 50.0);
            worst = std::max(worst, r.rel_diff);
        }
        report(8, worst <= 1e-5, f("Poisson in r, 5 configurations: max rel diff %.2e (tol 1e-5)", worst));
    });

    // 9: K and L lemma suites
    guarded(9, [] {
        auto k = pipeline::k_lemma_checks(bump());
        pipeline::PhaseSpec ph(2000, 0.0, 1000);
        auto v = special::make_weight_v(20, 2.0);
        auto vn = pipeline::VNatural::make(v, bump(), eta_delta, 1, 12);
        auto fam = pipeline::stationary_family(ph, 200, 40, 1);
        pipeline::LEngine e(ph, vn, 200, 40, 1, fam);
        auto l = pipeline::l_lemma_checks(e);
        bool ok = k.pass && l.pass && k.negligible_max <= 1e-8 && l.negligible_max <= 1e-8 &&
                  std::fabs(l.exponent + 0.5) <= 0.1;
        report(9, ok, f("K: negligible %.1e, window %.1e, uniformity %.2f; L: negligible %.1e, mid-range exponent "
                        "%.3f +- %.3f on [%g, %g] (-0.5 +- 0.1), mid constant %.0f, zero constant %.0f",
                        k.negligible_max, k.window_max, k.uniformity, l.negligible_max, l.exponent,
                        l.exponent_stderr, l.x_mid.front(), l.x_mid.back(), l.mid_constant, l.zero_constant));
    });

    // 10: ratio ledger and sharp-cut check
    guarded(10, [] {
        double c = 0;
        for (double N : {1e3, 1e4})
            for (double e : {0.8, 1.0, 1.2}) c = std::max(c, pipeline::bound_ledger(delta_t, N, std::pow(N, e)).sharp_ratio);
        auto w = pipeline::wilton_check(delta_t, {1000, 2000, 4000, 8000}, 50);
        report(10, c <= 100 && w.constant <= 100,
               f("ratio to T^1/3 N^1/2 + N/T^1/6 over 6 (N,T): C %.3f (<= 100); sharp cut at T=0, 50 gamma: C %.3f",
                 c, w.constant));
    });

    // 11: appendix lemma checks
    guarded(11, [] {
        std::vector<double> lam{100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600, 51200, 102400};
        auto a1 = quad::check_nonstationary_decay({2, 4, 8, 16, 32, 100, 1000, 10000});
        auto a2 = quad::check_second_derivative_test({100, 1000, 10000});
        auto a3 = quad::check_second_derivative_test_2d({100, 200, 400, 800});
        auto a4 = quad::check_stationary_scaling(lam, 0);
        auto a4b = quad::check_stationary_scaling(lam, 1);
        bool ok = a1.pass && a2.pass && a3.pass && a4.pass && a4b.pass;
        report(11, ok, f("nonstationary exponent %.3f (<= %.1f), explicit bound %s, 2-d exponent %.3f (%.2f), "
                         "stationary exponents %.3f (%.2f), %.3f (%.2f)",
                         a1.fitted_exponent, a1.expected_exponent + 0.1, a2.pass ? "holds" : "violated",
                         a3.fitted_exponent, a3.expected_exponent, a4.fitted_exponent, a4.expected_exponent,
                         a4b.fitted_exponent, a4b.expected_exponent));
    });

    // 12: AFE self-consistency and the scan
    guarded(12, [] {
        auto t0 = std::chrono::steady_clock::now();
        lfunc::WeylScanOptions o;
        auto rd = lfunc::weyl_scan(delta_t.with_eta(eta_delta), o);
        auto r11 = lfunc::weyl_scan(t11.with_eta(eta_11), o);
        double s = seconds_since(t0);
        double cut = std::max(rd.max_cutoff_rel_diff, r11.max_cutoff_rel_diff);
        double conj = std::max(rd.max_conj_diff, r11.max_conj_diff);
        bool ok = cut <= 1e-6 && conj <= 1e-8 && rd.alpha <= 0.45 && std::isfinite(r11.alpha) && s <= 600;
        report(12, ok, f("cutoffs max rel diff %.1e (1e-6), conjugation %.1e (1e-8), alpha delta %.3f +- %.3f (<= 0.45), "
                         "alpha 11a %.3f, %.1f s (limit 600 s)",
                         cut, conj, rd.alpha, rd.alpha_stderr, r11.alpha, s));
    });

    // 13: cache round trip and determinism across thread counts
    guarded(13, [] {
        namespace fs = std::filesystem;
        fs::path dir = fs::temp_directory_path() / "bdlab-acceptance";
        fs::remove_all(dir);
        fs::create_directories(dir);
        bool bitwise = true;
        for (const auto* t : {&delta_t, &t11}) {
            auto path = (dir / (t->descriptor().label + ".bdc")).string();
            cache::write(*t, path);
            auto back = cache::read(path);
            bitwise = bitwise && back.n_max() == t->n_max() &&
                      std::memcmp(back.lambdas().data(), t->lambdas().data(), sizeof(double) * (t->n_max() + 1)) == 0 &&
                      back.raws() == t->raws();
        }
        auto run_with = [&](int threads) {
            set_threads(threads);
            app::RunConfig cfg;
            app::Context ctx(cfg);
            std::string out;
            for (const char* s : {"delta-identity", "decomposition", "bound-ledger"})
                out += app::suite_json(app::run_suite(s, ctx)).dump();
            return out;
        };
        std::string one = run_with(1), three = run_with(3);
        set_threads(0);
        bool same = one == three;
        report(13, bitwise && same,
               f("cache round trip bitwise %s; results JSON with 1 vs 3 threads %s (%zu bytes)",
                 bitwise ? "identical" : "different", same ? "identical" : "different", one.size()));
    });

    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
    int failed = 0;
    for (const auto& l : lines) {
        std::printf("criterion %2d %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.text.c_str());
        failed += !l.pass;
    }
    std::printf("acceptance: %zu criteria, %d failed, %.1f s\n", lines.size(), failed, seconds_since(t_all));
    return failed == 0 ? 0 : 1;
}
