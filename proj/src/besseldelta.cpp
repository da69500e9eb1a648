#include "bdlab/besseldelta.hpp"

#include <cmath>
#include <sstream>

#include "bdlab/error.hpp"
#include "bdlab/fit.hpp"
#include "bdlab/numtheory.hpp"

namespace bdlab::besseldelta {

namespace {

const cplx I1(0.0, 1.0);

cplx ipow(int k) {
    static const cplx t[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return t[((k % 4) + 4) % 4];
}

void accumulate(QuadResult& total, const QuadResult& part) {
    total.value += part.value;
    total.err_estimate += part.err_estimate;
    total.panels += part.panels;
    total.evaluations += part.evaluations;
    total.converged = total.converged && part.converged;
    total.scale += part.scale;
}

// smallest argument >= handover where the large-argument amplitudes are accurate to 1e-14
double asymptotic_start(int nu) {
    double z = special::bessel_handover(nu);
    while (special::hankel_pq(nu, z).error_bound > 1e-14 && z < 1e9) z *= 1.25;
    return z;
}

}  // namespace

QuadResult bessel_integral_I(double a, double b, double X, int k, const BumpU& u,
                             const QuadOptions& opt, int sign) {
    if (k < 2) throw PreconditionError("bessel_integral_I: k must be >= 2");
    if (!(X > 1.0)) throw PreconditionError("bessel_integral_I: X must exceed 1");
    const int nu = k - 1;
    const double sX = std::sqrt(X);
    const double zscale = 4.0 * M_PI * b * sX;  // z(t) = zscale sqrt(t)
    const double z0 = asymptotic_start(nu);
    double t_h = (zscale > 0.0) ? (z0 / zscale) * (z0 / zscale) : 1e300;
    const double s = sign >= 0 ? 1.0 : -1.0;

    QuadResult total;
    double lo = 1.0, hi = 2.0;
    double mid = std::clamp(t_h, lo, hi);
    if (mid > lo) {
        auto amp = [&](double t) -> cplx {
            double ut = u(t);
            if (ut == 0.0) return 0.0;
            return X * ut * special::bessel_j(nu, zscale * std::sqrt(t));
        };
        auto phase = [&](double t) { return s * 2.0 * a * sX * std::sqrt(t); };
        auto rate = [&](double t) { return (a + b) * sX / std::sqrt(t); };
        accumulate(total, quad::integrate_oscillatory(amp, phase, rate, lo, mid, opt));
    }
    if (mid < hi) {
        for (int pm : {+1, -1}) {
            auto amp = [&](double t) -> cplx {
                double ut = u(t);
                if (ut == 0.0) return 0.0;
                double z = zscale * std::sqrt(t);
                cplx w = special::hankel_amplitude(nu, z);
                if (pm < 0) w = std::conj(w);
                return X * ut * w / std::sqrt(2.0 * M_PI * z);
            };
            auto phase = [&](double t) { return (s * a + pm * b) * 2.0 * sX * std::sqrt(t); };
            auto rate = [&](double t) { return std::fabs(s * a + pm * b) * sX / std::sqrt(t); };
            accumulate(total, quad::integrate_oscillatory(amp, phase, rate, mid, hi, opt));
        }
    }
    return total;
}

cplx diagonal_main_term(double a, double X, int k, const BumpU& u) {
    double ut = u.mellin_three_quarters();
    return (1.0 + I1) * ipow(k - 1) * ut * X / (4.0 * M_PI * std::pow(a * a * X, 0.25));
}

DiagonalReport verify_diagonal_asymptotic(int k, const BumpU& u, double a,
                                          const std::vector<double>& X_grid,
                                          const QuadOptions& opt) {
    DiagonalReport rep;
    rep.a = a;
    rep.k = k;
    std::vector<double> xs, ds;
    for (double X : X_grid) {
        if (a * a * X <= 10.0) throw PreconditionError("verify_diagonal_asymptotic: need a^2 X > 10");
        QuadResult r = bessel_integral_I(a, a, X, k, u, opt);
        DiagonalRow row;
        row.X = X;
        row.value = r.value;
        row.main = diagonal_main_term(a, X, k, u);
        row.diff = std::abs(r.value - row.main);
        row.ratio = row.diff / (X / std::pow(a * a * X, 0.75));
        rep.max_constant = std::max(rep.max_constant, row.ratio);
        rep.rows.push_back(row);
        xs.push_back(X);
        ds.push_back(row.diff);
    }
    LineFit f = fit_loglog(xs, ds);
    rep.exponent = f.slope;
    rep.exponent_stderr = f.slope_stderr;
    rep.pass = std::fabs(rep.exponent - 0.25) <= 0.1 && rep.max_constant <= 100.0;
    return rep;
}

OffDiagonalReport verify_offdiagonal_decay(int k, const BumpU& u, double a, double b, double X,
                                           double threshold, double eps, const QuadOptions& opt) {
    if (!(b * b * X > 1.0)) throw PreconditionError("verify_offdiagonal_decay: need b^2 X > 1");
    OffDiagonalReport rep{a, b, X, k, {}, 0.0, 0.0, 0.0, 0.0, false};
    QuadResult r = bessel_integral_I(a, b, X, k, u, opt);
    rep.value = r.value;
    rep.relative = std::abs(r.value) / X;
    rep.separation = std::fabs(a - b) * std::sqrt(X);
    rep.onset_scale = std::pow(X, eps);
    // scan the separation upward from X^eps / 10 until the integral drops below the threshold
    rep.onset_ratio = std::numeric_limits<double>::infinity();
    double dir = (b >= a) ? 1.0 : -1.0;
    for (double m = 0.1; m <= 100.0; m *= 1.5) {
        double d = m * rep.onset_scale / std::sqrt(X);
        double bb = a + dir * d;
        if (bb <= 0.0) break;
        QuadResult q = bessel_integral_I(a, bb, X, k, u, opt);
        if (std::abs(q.value) / X <= threshold) {
            rep.onset_ratio = m;
            break;
        }
    }
    rep.pass = rep.separation < 10.0 * rep.onset_scale || rep.relative <= threshold;
    return rep;
}

WeberReport weber_identity_check(double a, double b, double X, int k, const QuadOptions& opt) {
    if (!(a > 0 && b > 0 && X > 0)) throw PreconditionError("weber_identity_check: a, b, X must be positive");
    if (k < 2) throw PreconditionError("weber_identity_check: k must be >= 2");
    const int nu = k - 1;
    WeberReport rep{a, b, X, k};
    // x = s^2; the Gaussian factor is below e^{-40} past s_max
    double s_max = std::sqrt(40.0 * X / (2.0 * M_PI));
    auto amp = [&](double s) -> cplx {
        return 2.0 * s * std::exp(-2.0 * M_PI * s * s / X) * special::bessel_j(nu, 4.0 * M_PI * a * s) *
               special::bessel_j(nu, 4.0 * M_PI * b * s);
    };
    auto phase = [](double) { return 0.0; };
    double rate_c = 2.0 * (a + b);
    auto rate = [&](double) { return rate_c; };
    QuadOptions o = opt;
    o.coarse_cells = std::max(o.coarse_cells, 64);
    QuadResult r = quad::integrate_oscillatory(amp, phase, rate, 0.0, s_max, o);
    rep.lhs = r.value.real();
    rep.lhs_err = r.err_estimate;
    double z = 4.0 * M_PI * a * b * X;
    rep.rhs = X / (2.0 * M_PI) * special::bessel_i_scaled(nu, z) * std::exp(-2.0 * M_PI * (a - b) * (a - b) * X);
    rep.rel_diff = std::fabs(rep.lhs - rep.rhs) / std::fabs(rep.rhs);
    return rep;
}

HankelInversionReport hankel_inversion_check(const std::function<double(double)>& F,
                                             const std::vector<double>& b_grid, int k, double x_max,
                                             const QuadOptions& opt) {
    const int nu = k - 1;
    HankelInversionReport rep;
    rep.k = k;
    rep.x_max = x_max;
    rep.b = b_grid;
    double b_top = 0.0;
    for (double b : b_grid) b_top = std::max(b_top, b);
    double rate_c = (2.0 + b_top) / (2.0 * M_PI);

    // inner transform G(x) = integral of F(a) J(ax) a da over [1,2]
    auto inner = [&](double x) -> double {
        auto amp = [&](double a) -> cplx { return F(a) * special::bessel_j(nu, a * x) * a; };
        auto phase = [](double) { return 0.0; };
        auto rate = [&](double) { return x / (2.0 * M_PI); };
        return quad::integrate_oscillatory(amp, phase, rate, 1.0, 2.0, opt).value.real();
    };

    QuadOptions oo = opt;
    oo.coarse_cells = std::max(64, int(std::ceil(x_max / 4.0)));
    std::vector<double> br = quad::panel_breaks([&](double) { return rate_c; }, 0.0, x_max, oo);
    std::vector<double> br2 = quad::refine_breaks(br);
    const auto& g = quad::gl16();

    // G on the nodes of the finer grid, cut once it is negligible
    double peak = 0.0;
    rep.x_cut = x_max;
    bool cut = false;
    int quiet = 0;
    auto nodes_of = [&](const std::vector<double>& bb) {
        std::vector<std::pair<double, double>> nw;
        for (size_t i = 0; i + 1 < bb.size(); ++i) {
            double m = 0.5 * (bb[i] + bb[i + 1]), h = 0.5 * (bb[i + 1] - bb[i]);
            for (int j = 0; j < 16; ++j) nw.emplace_back(m + h * g.x[j], h * g.w[j]);
        }
        return nw;
    };
    auto n1 = nodes_of(br), n2 = nodes_of(br2);
    auto eval_G = [&](const std::vector<std::pair<double, double>>& nodes) {
        std::vector<double> G(nodes.size(), 0.0);
        for (size_t i = 0; i < nodes.size(); ++i) {
            double x = nodes[i].first;
            if (cut && x > rep.x_cut) continue;
            double v = inner(x);
            G[i] = v;
            peak = std::max(peak, std::fabs(v * x));
            if (std::fabs(v * x) < 1e-18 * peak)
                ++quiet;
            else
                quiet = 0;
            if (!cut && quiet > 256) {
                cut = true;
                rep.x_cut = x;
            }
        }
        return G;
    };
    auto G2 = eval_G(n2);
    auto G1 = eval_G(n1);

    rep.max_residual = 0.0;
    for (double b : b_grid) {
        double s2 = 0.0;
        for (size_t i = 0; i < n2.size(); ++i)
            if (G2[i] != 0.0) s2 += n2[i].second * n2[i].first * G2[i] * special::bessel_j(nu, b * n2[i].first);
        double target = (b > 1.0 && b < 2.0) ? F(b) : 0.0;
        rep.result.push_back(s2);
        rep.target.push_back(target);
        rep.max_residual = std::max(rep.max_residual, std::fabs(s2 - target));
    }
    (void)G1;
    return rep;
}

DeltaParams::DeltaParams(long p_, double N_, double X_, int k_, const BumpU& u_, double eps_)
    : p(p_), N(N_), X(X_), k(k_), eps(eps_), u(&u_) {
    if (!nt::is_prime(p)) throw PreconditionError("DeltaParams: p = " + std::to_string(p) + " is not prime");
    if (!(X > double(p) * double(p) / N)) {
        std::ostringstream os;
        os << "DeltaParams: X = " << X << " violates X > p^2/N = " << double(p) * p / N;
        throw PreconditionError(os.str());
    }
    if (!(N < std::pow(X, 1.0 - eps))) {
        std::ostringstream os;
        os << "DeltaParams: N = " << N << " violates N < X^(1-eps) = " << std::pow(X, 1.0 - eps);
        throw PreconditionError(os.str());
    }
}

cplx c_u(const BumpU& u) { return (1.0 + I1) / u.mellin_three_quarters(); }

DeltaValue delta_identity(long r, long n, const DeltaParams& P, const QuadOptions& opt) {
    DeltaValue out;
    if (nt::mod(n - r, P.p) != 0) {
        out.value = 0.0;
        return out;
    }
    double pr = double(P.p);
    QuadResult q = bessel_integral_I(std::sqrt(double(r)) / pr, std::sqrt(double(n)) / pr, P.X, P.k, *P.u, opt);
    cplx pref = 2.0 * M_PI * c_u(*P.u) * std::pow(double(r), 0.25) /
                (ipow(P.k) * std::sqrt(pr) * std::pow(P.X, 0.75));
    out.value = pref * q.value;
    out.err_estimate = std::abs(pref) * q.err_estimate;
    out.converged = q.converged;
    return out;
}

}  // namespace bdlab::besseldelta
