#include "bdlab/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "bdlab/besseldelta.hpp"
#include "bdlab/cache.hpp"
#include "bdlab/error.hpp"
#include "bdlab/fit.hpp"
#include "bdlab/lfunc.hpp"
#include "bdlab/numtheory.hpp"
#include "bdlab/parallel.hpp"
#include "bdlab/pipeline.hpp"
#include "bdlab/quad.hpp"

namespace fs = std::filesystem;

namespace bdlab::app {

using cplx = std::complex<double>;

bool SuiteResult::pass() const {
    for (const auto& c : checks)
        if (c.hard && !c.pass) return false;
    return true;
}

Context::Context(RunConfig cfg) : cfg_(std::move(cfg)), u_(special::make_bump_u()) {}

forms::CoefficientTable Context::table(const std::string& label, long n_min) {
    long need = std::max(n_min, 100L);
    if (cfg_.n_max > 0 && need > cfg_.n_max)
        throw PreconditionError("form " + label + " needs n_max >= " + std::to_string(need) +
                                " but n_max = " + std::to_string(cfg_.n_max) + " is configured");
    if (need > cfg_.n_max_limit)
        throw PreconditionError("form " + label + " needs n_max >= " + std::to_string(need) +
                                ", above n_max_limit = " + std::to_string(cfg_.n_max_limit));
    auto it = tables_.find(label);
    if (it != tables_.end() && it->second.n_max() >= need) return it->second;
    forms::CoefficientTable t = cfg_.cache.empty() ? forms::coefficients_by_label(label, need)
                                                   : cache::load_or_build(cfg_.cache, label, need);
    tables_[label] = t;
    return t;
}

forms::CoefficientTable Context::calibrated(const std::string& label, long n_min) {
    forms::CoefficientTable t = table(label, std::max(n_min, 40000L));
    auto it = eta_.find(label);
    if (it == eta_.end()) {
        long c = t.descriptor().M == 1 ? 5 : 7;
        quad::QuadOptions o;
        o.tol_rel = cfg_.tol;
        auto cal = pipeline::calibrate_eta(t, c, cfg_.Y, o);
        it = eta_.emplace(label, cal.eta).first;
    }
    return t.with_eta(it->second);
}

namespace {

using pipeline::PhaseSpec;

quad::QuadOptions qopt(const Context& ctx) {
    quad::QuadOptions o;
    o.tol_rel = ctx.config().tol;
    return o;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

Check make_check(std::string name, bool pass, json values = json::object(), std::string note = {},
                 bool hard = true) {
    Check c;
    c.name = std::move(name);
    c.pass = pass;
    c.values = std::move(values);
    c.note = std::move(note);
    c.hard = hard;
    return c;
}


double relerr(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// ---- forms-check ----

SuiteResult suite_forms(Context& ctx) {
    SuiteResult s{"forms-check", {}, {}};
    const long n = 2000;
    auto pent = forms::tau_by_pentagonal(n);
    auto dense = forms::tau_by_dense_product(n);
    s.checks.push_back(make_check("tau pentagonal equals dense product", pent == dense, {{"n_max", n}}));

    static const long tau_known[] = {1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920};
    bool known = true;
    for (int i = 0; i < 10; ++i) known = known && pent[i + 1] == tau_known[i];
    s.checks.push_back(make_check("tau(1..10) known values", known));

    auto t11 = ctx.table("11a", 100000);
    auto eta = forms::eta_product_11a(n);
    bool same = true;
    for (long m = 1; m <= n; ++m) same = same && t11.raw(m) == eta[m];
    s.checks.push_back(make_check("11a point counts equal eta product", same, {{"n_max", n}}));

    static const std::pair<long, long> ap[] = {{2, -2}, {3, -1}, {5, 1}, {7, -2}, {13, 4}, {17, -2}, {19, 0}};
    bool ap_ok = true;
    for (auto [p, a] : ap) ap_ok = ap_ok && forms::ap_11a(p) == a;
    s.checks.push_back(make_check("11a a_p for small p", ap_ok));

    auto td = ctx.table("delta", 100000);
    std::mt19937_64 rng(12345);
    int bad = 0;
    for (auto* t : {&td, &t11}) {
        std::uniform_int_distribution<long> dist(2, 300);
        int done = 0;
        while (done < 200) {
            long a = dist(rng), b = dist(rng);
            if (nt::gcd(a, b) != 1 || a * b > t->n_max()) continue;
            if (t->raw(a * b) != t->raw(a) * t->raw(b)) ++bad;
            ++done;
        }
    }
    s.checks.push_back(make_check("multiplicativity on 200 coprime pairs per form", bad == 0, {{"failures", bad}}));
    bool hecke = td.raw(4) == td.raw(2) * td.raw(2) - (forms::i128(1) << 11) && t11.raw(121) == t11.raw(11) * t11.raw(11) &&
                 td.raw(12) == td.raw(4) * td.raw(3);
    s.checks.push_back(make_check("Hecke recursion instances", hecke));

    Table tab{"ramanujan", {"N", "mean_square_delta", "mean_square_11a"}, {}};
    auto rd = forms::ramanujan_report(td);
    auto r11 = forms::ramanujan_report(t11);
    bool band = true;
    for (size_t i = 0; i < rd.dyadic_N.size() && i < r11.dyadic_N.size(); ++i) {
        tab.rows.push_back({double(rd.dyadic_N[i]), rd.mean_square[i], r11.mean_square[i]});
        band = band && rd.mean_square[i] >= 0.01 && rd.mean_square[i] <= 100 && r11.mean_square[i] >= 0.01 &&
               r11.mean_square[i] <= 100;
    }
    s.checks.push_back(make_check("Deligne |lambda(n)| <= d(n)", rd.max_ratio <= 1.0 + 1e-12 && r11.max_ratio <= 1.0 + 1e-12,
                                  {{"max_ratio_delta", rd.max_ratio}, {"argmax_delta", rd.argmax},
                                   {"max_ratio_11a", r11.max_ratio}, {"argmax_11a", r11.argmax},
                                   {"n_max", td.n_max()}}));
    s.checks.push_back(make_check("mean square in [0.01, 100] on dyadic N", band));
    s.tables.push_back(std::move(tab));
    return s;
}

// ---- special-check ----

struct JOracle {
    int n;
    double x, v;
};

SuiteResult suite_special(Context& ctx) {
    SuiteResult s{"special-check", {}, {}};
    static const JOracle jo[] = {
        {0, 0.5, 0.93846980724081290423},     {1, 1.0, 0.44005058574493351596},
        {11, 5.0, 0.00035092744976620901015}, {11, 19.9, 0.045848184543023616682},
        {11, 20.1, 0.076360353646753862672},  {11, 25.0, -0.16823599003225700956},
        {11, 100.0, 0.052290326018936484163}, {30, 50.0, 0.048434257245509417485},
        {64, 100.0, 0.039985069452918338196}, {11, 1000.0, -0.0062061716181024621873},
        {1, 1e6, -0.00072596835681376304185}, {11, 1e9, 5.2104211603055552448e-6},
        {64, 70.0, 0.099019233739506266453},  {0, 1e4, -0.0070961603533888014773},
    };
    Table tj{"bessel_j", {"order", "x", "value", "reference", "rel_err"}, {}};
    double worst = 0;
    for (const auto& o : jo) {
        double v = special::bessel_j(o.n, o.x);
        double e = relerr(v, o.v);
        worst = std::max(worst, e);
        tj.rows.push_back({double(o.n), o.x, v, o.v, e});
    }
    s.checks.push_back(make_check("J_n against 40-digit references", worst <= 1e-10, {{"max_rel_err", worst}}));

    static const JOracle io[] = {{11, 5.0, 6.7079034374726758039e-6},
                                 {11, 50.0, 0.016744525656934678897},
                                 {64, 500.0, 0.00029738030925827466136}};
    double worst_i = 0;
    for (const auto& o : io) worst_i = std::max(worst_i, relerr(special::bessel_i_scaled(o.n, o.x), o.v));
    s.checks.push_back(make_check("e^-x I_n against references", worst_i <= 1e-12, {{"max_rel_err", worst_i}}));

    struct G {
        cplx s, v;
    };
    static const G go[] = {
        {{5, 30}, {-30.883004541385086391, 78.769617695308664998}},
        {{6, 10000}, {-15656.387457094892539, 82112.041591225940956}},
        {{0.5, 0}, {0.57236494292470008707, 0}},
        {{6.5, -200}, {-281.449529113789663, -868.99847291182317358}},
    };
    double worst_g = 0;
    for (const auto& g : go)
        worst_g = std::max(worst_g, std::abs(special::log_gamma(g.s) - g.v) / std::max(1.0, std::abs(g.v)));
    s.checks.push_back(make_check("log Gamma against references", worst_g <= 1e-13, {{"max_rel_err", worst_g}}));

    const auto& u = ctx.bump();
    double e_int = relerr(u.integral(), 0.0070298584066096562392);
    double e_34 = relerr(u.mellin_three_quarters(), 0.0063607386314564507071);
    double e_mid = relerr(u(1.5), 0.018315638888734180294);
    double e_pan = relerr(special::mellin_u_panels(u, 0.75, 64).real(), 0.0063607386314564507071);
    s.checks.push_back(make_check("bump constants", std::max({e_int, e_34, e_mid, e_pan}) <= 1e-10,
                                  {{"integral_rel_err", e_int}, {"mellin_3_4_rel_err", e_34},
                                   {"U_1_5_rel_err", e_mid}, {"panel_rule_rel_err", e_pan}}));

    Table tv{"weight_v", {"delta", "max_d1_over_delta", "max_d2_over_delta2"}, {}};
    double c1 = 0, c2 = 0;
    for (double d : {2.0, 5.0, 20.0, 80.0}) {
        auto v = special::make_weight_v(d, 2.0);
        double m1 = 0, m2 = 0;
        for (int i = 0; i <= 20000; ++i) {
            double x = 1.0 + 1.0 * i / 20000.0;
            m1 = std::max(m1, std::fabs(v.d1(x)));
            m2 = std::max(m2, std::fabs(v.d2(x)));
        }
        tv.rows.push_back({d, m1 / d, m2 / (d * d)});
        c1 = std::max(c1, m1 / d);
        c2 = std::max(c2, m2 / (d * d));
    }
    s.checks.push_back(make_check("weight derivatives scale as delta^j", c1 <= 100 && c2 <= 1e4,
                                  {{"C1", c1}, {"C2", c2}}));
    s.tables.push_back(std::move(tj));
    s.tables.push_back(std::move(tv));
    return s;
}

// ---- quad-appendix ----

SuiteResult suite_quad(Context&) {
    SuiteResult s{"quad-appendix", {}, {}};
    std::vector<double> lam{100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600, 51200, 102400};
    std::vector<quad::LemmaCheck> checks{
        quad::check_nonstationary_decay({2, 4, 8, 16, 32, 100, 1000, 10000}),
        quad::check_second_derivative_test({100, 1000, 10000}),
        quad::check_second_derivative_test_2d({100, 200, 400, 800}),
        quad::check_stationary_scaling(lam, 0),
        quad::check_stationary_scaling(lam, 1),
    };
    const char* names[] = {"nonstationary_decay", "second_derivative_test", "second_derivative_test_2d",
                           "stationary_scaling_j0", "stationary_scaling_j1"};
    for (size_t i = 0; i < checks.size(); ++i) {
        auto& c = checks[i];
        s.checks.push_back(make_check(c.name, c.pass,
                                      {{"fitted_constant", c.fitted_constant},
                                       {"fitted_exponent", c.fitted_exponent},
                                       {"expected_exponent", c.expected_exponent},
                                       {"exponent_tolerance", c.exponent_tolerance}},
                                      c.note));
        s.tables.push_back(Table{names[i], c.columns, c.rows});
    }
    return s;
}

// ---- bessel-asymptotics ----

SuiteResult suite_bessel(Context& ctx) {
    SuiteResult s{"bessel-asymptotics", {}, {}};
    const auto& u = ctx.bump();
    auto o = qopt(ctx);
    const double eps = ctx.config().epsilon;
    std::vector<double> X;
    for (int j = 0; j <= 6; ++j) X.push_back(1e3 * std::ldexp(1.0, j));
    Table td{"diagonal", {"a", "X", "abs_diff", "ratio"}, {}};
    for (double a : {1.0, 2.0}) {
        auto r = besseldelta::verify_diagonal_asymptotic(12, u, a, X, o);
        for (auto& row : r.rows) td.rows.push_back({a, row.X, row.diff, row.ratio});
        std::ostringstream nm;
        nm << "diagonal asymptotic a=" << a;
        s.checks.push_back(make_check(nm.str(), r.pass,
                                      {{"exponent", r.exponent}, {"exponent_stderr", r.exponent_stderr},
                                       {"expected", 0.25}, {"tolerance", 0.1}, {"max_constant", r.max_constant},
                                       {"window", {X.front(), X.back()}}}));
    }

    Table tod{"offdiagonal", {"a", "b", "X", "relative", "separation_over_onset", "onset_ratio"}, {}};
    const double as[] = {0.5, 1.0, 1.5, 2.0, 3.0};
    const double ms[] = {1.0, 2.0, 4.0, 8.0};
    std::vector<besseldelta::OffDiagonalReport> od(20);
    parallel_for(20, [&](long i) {
        double a = as[i / 4], Xi = (i % 2) ? 1e5 : 1e4;
        double b = a + ms[i % 4] * 10.0 * std::pow(Xi, eps) / std::sqrt(Xi);
        od[i] = besseldelta::verify_offdiagonal_decay(12, u, a, b, Xi, 1e-8, eps, o);
    });
    bool all_od = true;
    double worst = 0;
    for (auto& r : od) {
        all_od = all_od && r.pass;
        worst = std::max(worst, r.relative);
        tod.rows.push_back({r.a, r.b, r.X, r.relative, r.separation / r.onset_scale, r.onset_ratio});
    }
    s.checks.push_back(make_check("off-diagonal decay on 20 configurations", all_od,
                                  {{"max_relative", worst}, {"threshold", 1e-8}}));

    struct W {
        double a, b, X;
        int k;
    };
    static const W ws[] = {{0.1, 0.1, 10, 12},   {0.1, 0.2, 10, 12}, {0.3, 0.32, 100, 12}, {1, 1, 50, 2},
                           {0.5, 0.55, 200, 12}, {0.2, 0.25, 1000, 12}, {1, 1.2, 30, 2},  {0.4, 0.5, 100, 2},
                           {1.5, 1.6, 20, 4},    {0.25, 0.3, 500, 6}};
    Table tw{"weber", {"a", "b", "X", "k", "lhs", "rhs", "rel_diff"}, {}};
    double wmax = 0;
    for (const auto& w : ws) {
        auto r = besseldelta::weber_identity_check(w.a, w.b, w.X, w.k, o);
        wmax = std::max(wmax, r.rel_diff);
        tw.rows.push_back({w.a, w.b, w.X, double(w.k), r.lhs, r.rhs, r.rel_diff});
    }
    s.checks.push_back(make_check("Weber identity on 10 samples", wmax <= 1e-8, {{"max_rel_diff", wmax}}));

    auto F = [](double a) { return a > 1 && a < 2 ? std::exp(-1 / ((a - 1) * (2 - a))) : 0.0; };
    auto h = besseldelta::hankel_inversion_check(F, {0.5, 1.25, 1.5, 1.75, 2.5}, 12, 1000.0, o);
    Table th{"hankel_inversion", {"b", "result", "target"}, {}};
    for (size_t i = 0; i < h.b.size(); ++i) th.rows.push_back({h.b[i], h.result[i], h.target[i]});
    s.checks.push_back(make_check("Hankel inversion", h.max_residual <= 1e-3,
                                  {{"max_residual", h.max_residual}, {"x_max", h.x_max}, {"x_cut", h.x_cut}}));
    for (auto* t : {&td, &tod, &tw, &th}) s.tables.push_back(std::move(*t));
    return s;
}

// ---- delta-identity ----

SuiteResult suite_delta(Context& ctx) {
    SuiteResult s{"delta-identity", {}, {}};
    const auto& cfg = ctx.config();
    int k = forms::coefficients_by_label(cfg.form, 10).descriptor().k;
    besseldelta::DeltaParams P(cfg.p, cfg.N, cfg.X, k, ctx.bump(), cfg.epsilon);
    auto o = qopt(ctx);
    const int G = 50;
    std::vector<long> r(G);
    for (int i = 0; i < G; ++i) r[i] = long(cfg.N) + 20 * i;
    std::vector<besseldelta::DeltaValue> v(G * G);
    parallel_for(G * G, [&](long idx) { v[idx] = besseldelta::delta_identity(r[idx / G], r[idx % G], P, o); });
    double scale = double(cfg.p) / std::sqrt(cfg.N * cfg.X);
    double c_diag = 0, off_max = 0, c_off = 0;
    long congruent = 0;
    Table t{"grid", {"r", "n", "re", "im", "abs"}, {}};
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            cplx z = v[i * G + j].value;
            t.rows.push_back({double(r[i]), double(r[j]), z.real(), z.imag(), std::abs(z)});
            if (i == j) {
                c_diag = std::max(c_diag, std::abs(z - 1.0) / scale);
            } else {
                off_max = std::max(off_max, std::abs(z));
                c_off = std::max(c_off, std::abs(z) / scale);
                if ((r[j] - r[i]) % cfg.p == 0) ++congruent;
            }
        }
    s.checks.push_back(make_check("diagonal within C p / sqrt(NX) of 1", c_diag <= 10,
                                  {{"C", c_diag}, {"scale", scale}, {"N", cfg.N}, {"X", cfg.X}, {"p", cfg.p}}));
    s.checks.push_back(make_check("off-diagonal <= max(C p / sqrt(NX), 1e-6)", off_max <= std::max(10 * scale, 1e-6),
                                  {{"max_abs", off_max}, {"C", c_off}, {"congruent_pairs", congruent}}));
    s.tables.push_back(std::move(t));
    return s;
}

// ---- voronoi ----

SuiteResult suite_voronoi(Context& ctx) {
    SuiteResult s{"voronoi", {}, {}};
    const auto& cfg = ctx.config();
    auto t = ctx.table(cfg.form, 40000);
    bool level1 = t.descriptor().M == 1;
    std::vector<long> cs = level1 ? std::vector<long>{5, 7} : std::vector<long>{7, 13};
    auto o = qopt(ctx);
    Table tab{"residuals", {"a", "c", "Y", "eta", "rel_diff", "dual_terms"}, {}};
    std::vector<pipeline::EtaCalibration> cal;
    for (long c : cs) {
        auto e = pipeline::calibrate_eta(t, c, cfg.Y, o);
        cal.push_back(e);
        s.checks.push_back(make_check("eta calibration c=" + std::to_string(c),
                                      e.winner_residual < 1e-6 && e.loser_residual > 10 * e.winner_residual,
                                      {{"eta", cjson(e.eta)}, {"winner", e.winner_residual}, {"loser", e.loser_residual}}));
    }
    bool stable = cal.size() == 2 && std::abs(cal[0].eta - cal[1].eta) < 1e-12;
    s.checks.push_back(make_check("eta stable across moduli", stable, {{"eta", cjson(cal[0].eta)}}));
    cplx eta = cal[0].eta;
    for (long c : cs)
        for (long a : {1L, 2L, 3L}) {
            auto r = pipeline::voronoi_check(t, a, c, cfg.Y, eta, {}, o);
            tab.rows.push_back({double(a), double(c), cfg.Y, eta.real(), r.rel_diff, double(r.dual_terms)});
            s.checks.push_back(make_check("identity a=" + std::to_string(a) + " c=" + std::to_string(c),
                                          r.rel_diff <= 1e-6 && r.truncated,
                                          {{"rel_diff", r.rel_diff}, {"lhs", cjson(r.lhs)}, {"rhs", cjson(r.rhs)},
                                           {"dual_terms", r.dual_terms}}));
        }
    auto inv = pipeline::voronoi_involution(t, 2, cs[0], 150, eta);
    s.checks.push_back(make_check("applying the dual construction twice", inv.rel_diff <= 1e-5,
                                  {{"rel_diff", inv.rel_diff}, {"a", 2}, {"c", cs[0]}, {"Y", 150}}));
    s.tables.push_back(std::move(tab));
    return s;
}

// ---- poisson-step ----

SuiteResult suite_poisson(Context& ctx) {
    SuiteResult s{"poisson-step", {}, {}};
    const auto& cfg = ctx.config();
    auto o = qopt(ctx);
    const auto& u = ctx.bump();
    auto t = ctx.calibrated(cfg.form, 1000);
    const auto& d = t.descriptor();
    auto v = special::make_weight_v(20, 2.0);
    auto vn = pipeline::VNatural::make(v, u, d.eta, d.M, d.k);

    struct PC {
        double T, gamma;
        long p;
        double nfrac;
        pipeline::PhiKind kind;
    };
    static const PC pcs[] = {{1000, 0.0, 59, 1.5, pipeline::PhiKind::neg_log},
                             {1000, 0.0, 67, 1.2, pipeline::PhiKind::neg_log},
                             {500, 0.25, 61, 1.5, pipeline::PhiKind::neg_log},
                             {1000, 0.0, 71, 1.7, pipeline::PhiKind::power},
                             {800, 0.5, 89, 1.4, pipeline::PhiKind::neg_log}};
    Table tp{"poisson", {"T", "gamma", "p", "n", "rel_diff", "cap_stability", "edge_ratio", "r_terms"}, {}};
    double worst = 0;
    bool caps = true;
    const double Nn = 1000, P = 50;
    for (const auto& c : pcs) {
        PhaseSpec f(c.T, c.gamma, Nn, c.kind, c.kind == pipeline::PhiKind::power ? 1.5 : 0.0);
        double K = std::pow(c.T, 2.0 / 3.0);
        double X = P * P * K * K / Nn;
        long n = long(c.nfrac * d.M * X);
        auto r = pipeline::poisson_r_identity_check(n, c.p, f, vn, P, d.M, o);
        worst = std::max(worst, r.rel_diff);
        caps = caps && r.cap_ok;
        tp.rows.push_back({c.T, c.gamma, double(c.p), double(n), r.rel_diff, r.cap_stability, r.edge_ratio,
                           double(r.r_terms)});
    }
    s.checks.push_back(make_check("Poisson in r on 5 configurations", worst <= 1e-5,
                                  {{"max_rel_diff", worst}, {"N", Nn}, {"P", P}}));
    s.checks.push_back(make_check("r-sum truncation at 10 PT/N", caps));

    {
        PhaseSpec f(1000, 0.0, Nn);
        double K = 100;
        double X = P * P * K * K / Nn;
        double y = 1.5 * d.M * X;
        long p = 59;
        double scale = vn.abs_integral();
        double omax = 0;
        for (double m : {1.0, 1.5, 3.0})
            for (double sg : {-1.0, 1.0}) {
                double r = std::round(f.gamma() * p + sg * m * 10.0 * f.T() * p / Nn);
                auto q = pipeline::j_integral(y, r, p, f, vn, d.M, o);
                omax = std::max(omax, std::abs(q.value));
            }
        s.checks.push_back(make_check("J negligible once N|r/p - gamma| >= 10T", omax <= 1e-8 * scale,
                                      {{"max_abs_J", omax}, {"natural_scale", scale}, {"p", p}}));
    }

    auto kr = pipeline::k_lemma_checks(u);
    Table tk{"k_bounds", {"j", "x", "bound"}, {}};
    for (size_t j = 0; j < kr.w_bounds.size(); ++j)
        for (size_t i = 0; i < kr.x_grid.size(); ++i) tk.rows.push_back({double(j), kr.x_grid[i], kr.w_bounds[j][i]});
    s.checks.push_back(make_check("K integral lemma", kr.pass,
                                  {{"negligible_max", kr.negligible_max}, {"window_max", kr.window_max},
                                   {"uniformity", kr.uniformity}, {"collapse_defect", kr.collapse_defect}}));

    {
        PhaseSpec f(2000, 0.0, Nn);
        auto v2 = special::make_weight_v(20, 2.0);
        auto vn2 = pipeline::VNatural::make(v2, u, d.eta, d.M, d.k);
        double K = 200, P2 = 40;
        auto fam = pipeline::stationary_family(f, K, P2, d.M);
        pipeline::LEngine e(f, vn2, K, P2, d.M, fam, o);
        auto lr = pipeline::l_lemma_checks(e);
        Table tl{"l_envelope", {"x", "envelope", "envelope_T_sqrt_x"}, {}};
        for (size_t i = 0; i < lr.x_mid.size(); ++i)
            tl.rows.push_back({lr.x_mid[i], lr.envelope[i], lr.envelope[i] * lr.T * std::sqrt(lr.x_mid[i])});
        s.checks.push_back(make_check("L integral lemma", lr.pass,
                                      {{"exponent", lr.exponent}, {"exponent_stderr", lr.exponent_stderr},
                                       {"expected", -0.5}, {"tolerance", 0.1},
                                       {"window", {lr.x_mid.front(), lr.x_mid.back()}},
                                       {"negligible_max", lr.negligible_max}, {"mid_constant", lr.mid_constant},
                                       {"zero_constant", lr.zero_constant}, {"max_LT", lr.max_LT},
                                       {"T", lr.T}, {"K", lr.K}, {"P", lr.P}, {"N", lr.N}, {"X", lr.X},
                                       {"family_size", long(fam.size())}}));
        s.tables.push_back(std::move(tl));
    }

    std::mt19937_64 rng(777);
    auto primes = nt::primes_in(50, 400);
    std::uniform_int_distribution<size_t> pick(0, primes.size() - 1);
    int bad = 0;
    for (int i = 0; i < 50; ++i) {
        long p1 = primes[pick(rng)], p2 = primes[pick(rng)];
        if (p1 == p2) {
            --i;
            continue;
        }
        std::uniform_int_distribution<long> rd(1, 100000);
        long r1, r2;
        do r1 = rd(rng); while (r1 % p1 == 0);
        do r2 = rd(rng); while (r2 % p2 == 0);
        long m = p1 * p2;
        long n = nt::mod(nt::inv_mod(nt::mod(r1, p1), p1) * p2 - nt::inv_mod(nt::mod(r2, p2), p2) * p1, m);
        long ninv1 = nt::inv_mod(nt::mod(n, p1), p1), ninv2 = nt::inv_mod(nt::mod(n, p2), p2);
        bool ok = nt::mod(r1 - ninv1 * p2, p1) == 0 && nt::mod(r2 + ninv2 * p1, p2) == 0;
        if (!ok) ++bad;
    }
    s.checks.push_back(make_check("congruence splitting on 50 random cases", bad == 0, {{"failures", bad}}));
    s.tables.push_back(std::move(tp));
    s.tables.push_back(std::move(tk));
    return s;
}

// ---- decomposition ----

SuiteResult suite_decomposition(Context& ctx) {
    SuiteResult s{"decomposition", {}, {}};
    const auto& cfg = ctx.config();
    PhaseSpec f(cfg.T, cfg.gamma, cfg.N);
    auto v = special::make_weight_v(cfg.delta, 2.0);
    Table tab{"residuals", {"K", "X", "residual", "envelope", "ratio", "abs_s_direct", "abs_s_decomposed",
                            "abs_zero_freq"}, {}};
    for (double K : {cfg.K, 2 * cfg.K}) {
        double X = cfg.P * cfg.P * K * K / cfg.N;
        auto t = ctx.calibrated(cfg.form, long(std::ceil(2.2 * X * 11)) + long(2 * cfg.N) + 10);
        pipeline::DecompositionOptions opt;
        opt.eps = cfg.epsilon;
        opt.cauchy_schwarz = true;
        auto d = pipeline::s_decomposed(t, f, v, K, cfg.P, ctx.bump(), opt);
        json viol = json::array();
        for (auto& x : d.violations) viol.push_back(x);
        std::ostringstream nm;
        nm << "residual within 10 x envelope, K=" << K;
        s.checks.push_back(make_check(nm.str(), d.ratio <= 10,
                                      {{"residual", d.residual}, {"residual_without_zero", d.residual_without_zero},
                                       {"envelope", d.envelope}, {"ratio", d.ratio}, {"X", d.X}, {"P", d.P},
                                       {"p_star", d.p_star}, {"s_direct", cjson(d.s_direct)},
                                       {"s_decomposed", cjson(d.s_decomposed)}, {"s_zero_freq", cjson(d.s_zero_freq)},
                                       {"hypothesis_violations", viol}},
                                      d.violations.empty() ? "" : "hypotheses violated; evaluated anyway"));
        s.checks.push_back(make_check("Cauchy-Schwarz inequality, K=" + nm.str().substr(nm.str().find('=') + 1),
                                      d.cauchy_schwarz_lhs <= d.cauchy_schwarz_rhs * (1 + 1e-12),
                                      {{"lhs", d.cauchy_schwarz_lhs}, {"rhs", d.cauchy_schwarz_rhs}}));
        tab.rows.push_back({K, d.X, d.residual, d.envelope, d.ratio, std::abs(d.s_direct), std::abs(d.s_decomposed),
                            std::abs(d.s_zero_freq)});
    }
    s.tables.push_back(std::move(tab));
    return s;
}

// ---- bound-ledger ----

SuiteResult suite_bound(Context& ctx) {
    SuiteResult s{"bound-ledger", {}, {}};
    const auto& cfg = ctx.config();
    Table tab{"ledger", {"N", "T", "K", "P", "s_diag_sq", "diag_estimate", "s_off_sq", "off_estimate", "sharp_abs",
                         "theorem_bound", "sharp_ratio"}, {}};
    double c_sharp = 0, c_diag = 0, c_off = 0;
    bool brute_ok = true, both_branches[2] = {false, false};
    double brute_dev = 0;
    long brute_runs = 0;
    auto t = ctx.table(cfg.form, 20001);
    for (double N : {1e3, 1e4})
        for (double e : {0.8, 1.0, 1.2}) {
            double T = std::pow(N, e);
            auto b = pipeline::bound_ledger(t, N, T, 0.0);
            c_sharp = std::max(c_sharp, b.sharp_ratio);
            c_diag = std::max(c_diag, b.s_diag_sq / b.diag_estimate);
            c_off = std::max(c_off, b.s_off_sq_split / b.off_estimate);
            if (b.s_off_sq_brute >= 0) {
                double dev = std::fabs(b.s_off_sq_brute - b.s_off_sq_split) / std::max(1.0, std::fabs(b.s_off_sq_brute));
                brute_dev = std::max(brute_dev, dev);
                brute_ok = brute_ok && dev <= 1e-9;
                ++brute_runs;
            }
            both_branches[b.t_at_least_n ? 1 : 0] = true;
            tab.rows.push_back({N, T, b.K, b.P, b.s_diag_sq, b.diag_estimate, b.s_off_sq_split, b.off_estimate,
                                b.sharp_abs, b.theorem_bound, b.sharp_ratio});
        }
    s.checks.push_back(make_check("sharp sum over theorem bound", c_sharp <= 100, {{"C", c_sharp}}));
    s.checks.push_back(make_check("diagonal sum over (KN + T) log P", c_diag <= 100, {{"C", c_diag}}));
    s.checks.push_back(make_check("off-diagonal sum over its estimate", c_off <= 100, {{"C", c_off}}));
    s.checks.push_back(make_check("split counting equals enumeration", brute_ok && brute_runs > 0,
                                  {{"max_rel_dev", brute_dev}, {"enumerated_cases", brute_runs}}));
    s.checks.push_back(make_check("both T < N and T >= N exercised", both_branches[0] && both_branches[1]));
    auto w = pipeline::wilton_check(t, {1000, 2000, 4000, 8000}, 50);
    Table tw{"wilton", {"N", "max_ratio"}, {}};
    for (size_t i = 0; i < w.N.size(); ++i) tw.rows.push_back({w.N[i], w.max_ratio[i]});
    s.checks.push_back(make_check("sharp cut at T=0 within C sqrt(N) log 2N", w.constant <= 10,
                                  {{"C", w.constant}, {"gamma_points", 50}, {"window", {w.N.front(), w.N.back()}}}));
    s.tables.push_back(std::move(tab));
    s.tables.push_back(std::move(tw));
    return s;
}

// ---- sumscan ----

SuiteResult suite_sumscan(Context& ctx) {
    SuiteResult s{"sumscan", {}, {}};
    const auto& cfg = ctx.config();
    Table tab{"sums", {"N", "T", "abs_S", "theorem_bound", "ratio"}, {}};
    std::vector<double> Ns;
    for (int j = 0; j < 5; ++j) Ns.push_back(cfg.N * std::ldexp(1.0, j));
    auto t = ctx.table(cfg.form, long(2 * Ns.back()) + 2);
    double c = 0;
    for (double N : Ns)
        for (double e : {0.5, 0.8, 1.0}) {
            double T = std::pow(N, e);
            double delta = std::min(cfg.delta, T / std::pow(N, cfg.epsilon));
            delta = std::max(delta, 2.0);
            auto v = special::make_weight_v(delta, 2.0);
            PhaseSpec f(T, cfg.gamma, N);
            pipeline::check_pairing(f, v, cfg.epsilon);
            double a = std::abs(pipeline::s_direct(t, f, v));
            double bound = std::cbrt(T) * std::sqrt(N) + N / std::pow(T, 1.0 / 6.0);
            c = std::max(c, a / bound);
            tab.rows.push_back({N, T, a, bound, a / bound});
        }
    s.checks.push_back(make_check("smooth sums over theorem bound", c <= 100, {{"C", c}}));
    auto v = special::make_weight_v(cfg.delta, 2.0);
    cplx z = pipeline::s_direct(t, PhaseSpec(0, 0, cfg.N), v);
    s.checks.push_back(make_check("phase-free sum is real", std::fabs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z)),
                                  {{"value", cjson(z)}}));
    s.tables.push_back(std::move(tab));
    return s;
}

// ---- lvalue ----

SuiteResult suite_lvalue(Context& ctx) {
    SuiteResult s{"lvalue", {}, {}};
    const auto& cfg = ctx.config();
    std::vector<double> ts{0, 16, 50, 200};
    long need = 0;
    auto d0 = forms::coefficients_by_label(cfg.form, 10).descriptor();
    for (double t : ts) {
        need = std::max(need, lfunc::required_n_max(d0, cplx(0.5, t), lfunc::cutoff_f1()));
        need = std::max(need, lfunc::required_n_max(d0, cplx(0.5, t), lfunc::cutoff_f2()));
        need = std::max(need, lfunc::required_n_max(d0, cplx(2.0, t), lfunc::cutoff_f2()));
    }
    auto tab_c = ctx.calibrated(cfg.form, std::max(need, 60000L));
    const auto& d = tab_c.descriptor();
    Table tab{"values", {"t", "conductor", "re", "im", "cutoff_rel_diff", "conj_diff", "literal_diff", "envelope",
                         "dirichlet_rel_diff"}, {}};
    double worst_cut = 0, worst_conj = 0, worst_dir = 0;
    bool literal_ok = true;
    double central_imag = 0, central_env = 0;
    for (double t : ts) {
        auto a = lfunc::afe_lvalue(tab_c, t, lfunc::cutoff_f1());
        auto b = lfunc::afe_lvalue(tab_c, t, lfunc::cutoff_f2());
        auto m = lfunc::afe_lvalue(tab_c, -t, lfunc::cutoff_f1());
        auto lit = lfunc::afe_lvalue(tab_c, t, lfunc::cutoff_literal());
        double cut = std::abs(a.value - b.value) / std::abs(a.value);
        double conj = std::abs(m.value - std::conj(a.value));
        double env = 10 * std::sqrt(double(d.M)) / std::pow(a.conductor, 0.25);
        double lit_d = std::abs(lit.value - a.value);
        auto dc = lfunc::dirichlet_check(tab_c, t);
        worst_cut = std::max(worst_cut, cut);
        worst_conj = std::max(worst_conj, conj);
        worst_dir = std::max(worst_dir, dc.rel_diff);
        literal_ok = literal_ok && lit_d <= env;
        if (t == 0) {
            central_imag = std::fabs(a.value.imag());
            central_env = env;
        }
        tab.rows.push_back({t, a.conductor, a.value.real(), a.value.imag(), cut, conj, lit_d, env, dc.rel_diff});
    }
    double c0 = lfunc::analytic_conductor(d, 0);
    double c0_expect = d.M / (4 * M_PI * M_PI) * (d.k / 2.0) * (d.k / 2.0 + 1);
    s.checks.push_back(make_check("conductor at t=0", relerr(c0, c0_expect) <= 1e-15, {{"C", c0}}));
    s.checks.push_back(make_check("two cutoffs agree", worst_cut <= 1e-6, {{"max_rel_diff", worst_cut}}));
    s.checks.push_back(make_check("L(-t) = conj L(t)", worst_conj <= 1e-8, {{"max_abs_diff", worst_conj}}));
    s.checks.push_back(make_check("Dirichlet series at s = 2 + it", worst_dir <= 1e-8, {{"max_rel_diff", worst_dir}}));
    s.checks.push_back(make_check("central value is real", central_imag <= central_env,
                                  {{"abs_imag", central_imag}, {"envelope", central_env}}));
    s.checks.push_back(make_check("literal cutoff within 10 M^1/2 / C^1/4", literal_ok));
    s.tables.push_back(std::move(tab));
    return s;
}

// ---- weylscan ----

SuiteResult suite_weyl(Context& ctx) {
    SuiteResult s{"weylscan", {}, {}};
    const auto& cfg = ctx.config();
    lfunc::WeylScanOptions opt;
    opt.t_grid = cfg.t_grid;
    auto d0 = forms::coefficients_by_label(cfg.form, 10).descriptor();
    long need = lfunc::weyl_required_n_max(d0, opt);
    auto t = ctx.calibrated(cfg.form, need);
    auto r = lfunc::weyl_scan(t, opt);
    Table rows{"points", {"t", "conductor", "abs_L", "cutoff_rel_diff", "conj_diff", "literal_diff", "envelope",
                          "truncation_n"}, {}};
    for (auto& w : r.rows)
        rows.rows.push_back({w.t, w.conductor, w.abs_value, w.cutoff_rel_diff, w.conj_diff, w.literal_diff, w.envelope,
                             double(w.truncation_n)});
    Table blocks{"blocks", {"t", "block_max_abs_L"}, {}};
    for (size_t i = 0; i < r.block_t.size(); ++i) blocks.rows.push_back({r.block_t[i], r.block_max[i]});
    Table sb{"s_blocks", {"t", "N", "abs_S", "ratio"}, {}};
    for (auto& b : r.s_blocks) sb.rows.push_back({b.t, b.N, b.abs_S, b.ratio});
    s.checks.push_back(make_check("cutoff independence", r.max_cutoff_rel_diff <= 1e-6,
                                  {{"max_rel_diff", r.max_cutoff_rel_diff}}));
    s.checks.push_back(make_check("conjugation symmetry", r.max_conj_diff <= 1e-8, {{"max_abs_diff", r.max_conj_diff}}));
    s.checks.push_back(make_check("literal cutoff within envelope", r.literal_within_envelope));
    json fit{{"alpha", r.alpha}, {"alpha_stderr", r.alpha_stderr}, {"window", {r.fit_t_min, r.fit_t_max}},
             {"n_max", t.n_max()}};
    if (d0.M == 1)
        s.checks.push_back(make_check("fitted exponent <= 0.45", r.alpha <= 0.45, fit));
    else
        s.checks.push_back(make_check("fitted exponent (reported)", std::isfinite(r.alpha), fit));
    double smax = 0;
    for (auto& b : r.s_blocks) smax = std::max(smax, b.ratio);
    s.checks.push_back(make_check("dyadic pieces |S(N)| / (sqrt(N) t^1/3)", std::isfinite(smax), {{"max_ratio", smax}},
                                  "", false));
    s.tables.push_back(std::move(rows));
    s.tables.push_back(std::move(blocks));
    s.tables.push_back(std::move(sb));
    return s;
}

using SuiteFn = SuiteResult (*)(Context&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> r{
        {"forms-check", suite_forms},         {"special-check", suite_special}, {"quad-appendix", suite_quad},
        {"bessel-asymptotics", suite_bessel}, {"delta-identity", suite_delta},  {"voronoi", suite_voronoi},
        {"poisson-step", suite_poisson},      {"decomposition", suite_decomposition},
        {"bound-ledger", suite_bound},        {"sumscan", suite_sumscan},       {"lvalue", suite_lvalue},
        {"weylscan", suite_weyl},
    };
    return r;
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".bdlab.lock") {
        f_ = std::fopen(path_.c_str(), "wx");
        if (!f_) throw ConfigError("output directory " + dir.string() + " is locked by another run (" + path_.string() + ")");
    }
    ~DirLock() {
        std::fclose(f_);
        std::error_code ec;
        fs::remove(path_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path path_;
    std::FILE* f_;
};

}  // namespace

SuiteResult run_suite(const std::string& name, Context& ctx) {
    for (const auto& [n, fn] : registry())
        if (n == name) return fn(ctx);
    throw ConfigError("unknown suite: " + name);
}

json suite_json(const SuiteResult& s) {
    json checks = json::array();
    for (const auto& c : s.checks) {
        json j{{"name", c.name}, {"pass", c.pass}, {"hard", c.hard}, {"values", c.values}};
        if (!c.note.empty()) j["note"] = c.note;
        checks.push_back(std::move(j));
    }
    json tables = json::array();
    for (const auto& t : s.tables) tables.push_back(s.name + "__" + t.name + ".csv");
    return json{{"suite", s.name}, {"pass", s.pass()}, {"checks", checks}, {"tables", tables}};
}

void write_csv(const Table& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
        out << "\n";
    }
}

std::string csv_documentation() {
    static const char* doc[][2] = {
        {"forms-check", "ramanujan: N, mean_square_delta, mean_square_11a"},
        {"special-check", "bessel_j: order, x, value, reference, rel_err\n"
                          "    weight_v: delta, max_d1_over_delta, max_d2_over_delta2"},
        {"quad-appendix", "nonstationary_decay, second_derivative_test, second_derivative_test_2d,\n"
                          "    stationary_scaling_j0, stationary_scaling_j1: columns named in each header"},
        {"bessel-asymptotics", "diagonal: a, X, abs_diff, ratio\n"
                               "    offdiagonal: a, b, X, relative, separation_over_onset, onset_ratio\n"
                               "    weber: a, b, X, k, lhs, rhs, rel_diff\n"
                               "    hankel_inversion: b, result, target"},
        {"delta-identity", "grid: r, n, re, im, abs"},
        {"voronoi", "residuals: a, c, Y, eta, rel_diff, dual_terms"},
        {"poisson-step", "poisson: T, gamma, p, n, rel_diff, cap_stability, edge_ratio, r_terms\n"
                         "    k_bounds: j, x, bound\n"
                         "    l_envelope: x, envelope, envelope_T_sqrt_x"},
        {"decomposition", "residuals: K, X, residual, envelope, ratio, abs_s_direct, abs_s_decomposed, abs_zero_freq"},
        {"bound-ledger", "ledger: N, T, K, P, s_diag_sq, diag_estimate, s_off_sq, off_estimate, sharp_abs,\n"
                         "      theorem_bound, sharp_ratio\n"
                         "    wilton: N, max_ratio"},
        {"sumscan", "sums: N, T, abs_S, theorem_bound, ratio"},
        {"lvalue", "values: t, conductor, re, im, cutoff_rel_diff, conj_diff, literal_diff, envelope,\n"
                   "      dirichlet_rel_diff"},
        {"weylscan", "points: t, conductor, abs_L, cutoff_rel_diff, conj_diff, literal_diff, envelope, truncation_n\n"
                     "    blocks: t, block_max_abs_L\n"
                     "    s_blocks: t, N, abs_S, ratio"},
    };
    std::ostringstream o;
    o << "CSV files are written as <out>/<suite>__<table>.csv:\n";
    for (auto& d : doc) o << "  " << d[0] << "\n    " << d[1] << "\n";
    return o.str();
}

int run(const RunConfig& cfg_in, std::ostream& log) {
    RunConfig cfg = cfg_in;
    std::vector<std::string> suites;
    for (const auto& s : cfg.suites) {
        if (s == "all") {
            for (const auto& [n, fn] : registry()) suites.push_back(n);
        } else {
            suites.push_back(s);
        }
    }
    if (suites.empty()) {
        log << "error: no suite selected\n";
        return 2;
    }
    for (const auto& s : suites) {
        bool known = std::any_of(registry().begin(), registry().end(), [&](auto& r) { return r.first == s; });
        if (!known) {
            log << "error: unknown suite: " << s << "\n";
            return 2;
        }
    }
    if (cfg.form != "delta" && cfg.form != "11a") {
        log << "error: unknown form: " << cfg.form << "\n";
        return 2;
    }
    try {
        fs::create_directories(cfg.out);
        if (!cfg.cache.empty()) fs::create_directories(cfg.cache);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
    std::unique_ptr<DirLock> lock;
    try {
        lock = std::make_unique<DirLock>(cfg.out);
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
    set_threads(cfg.threads);
    {
        std::ofstream rc(fs::path(cfg.out) / "config.resolved");
        rc << cfg.resolved();
    }

    Context ctx(cfg);
    json results{{"schema", "bdlab-results/1"}, {"form", cfg.form}, {"suites", json::array()}};
    std::ostringstream summary;
    int status = 0;
    for (const auto& name : suites) {
        auto t0 = std::chrono::steady_clock::now();
        SuiteResult r;
        try {
            r = run_suite(name, ctx);
        } catch (const PreconditionError& e) {
            log << "error: suite " << name << ": " << e.what() << "\n";
            summary << name << ": precondition failed: " << e.what() << "\n";
            results["suites"].push_back(json{{"suite", name}, {"pass", false}, {"error", e.what()}});
            status = 2;
            break;
        } catch (const std::exception& e) {
            log << "error: suite " << name << ": computation failed: " << e.what() << "\n";
            summary << name << ": computation failed: " << e.what() << "\n";
            r.name = name;
            r.checks.push_back(make_check("computation", false, json::object(), e.what()));
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& t : r.tables) write_csv(t, (fs::path(cfg.out) / (name + "__" + t.name + ".csv")).string());
        results["suites"].push_back(suite_json(r));
        summary << name << ": " << (r.pass() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(1) << secs
                << " s)\n";
        summary.unsetf(std::ios::fixed);
        for (const auto& c : r.checks) {
            summary << "  " << (c.pass ? "pass " : (c.hard ? "FAIL " : "soft ")) << c.name;
            if (!c.note.empty()) summary << "  [" << c.note << "]";
            summary << "\n";
            if (c.hard && !c.pass) log << "failed check: " << name << " / " << c.name << "\n";
        }
        log << name << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
        if (!r.pass() && status == 0) status = 1;
    }
    results["pass"] = status == 0;
    results["config"] = json::object();
    {
        std::istringstream rs(cfg.resolved());
        std::string line;
        while (std::getline(rs, line)) {
            auto eq = line.find('=');
            if (eq != std::string::npos) results["config"][line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    std::ofstream(fs::path(cfg.out) / "results.json") << results.dump(2) << "\n";
    std::ofstream(fs::path(cfg.out) / "summary.txt") << summary.str();
    return status;
}

}  // namespace bdlab::app
