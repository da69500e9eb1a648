#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "bdlab/dd.hpp"

namespace bdlab::quad {

using cplx = std::complex<double>;

struct QuadResult {
    cplx value{0.0, 0.0};
    double err_estimate = 0.0;
    long panels = 0;
    long evaluations = 0;
    bool converged = true;
    double scale = 0.0;  // integral of |amplitude| on the final grid
};

struct QuadOptions {
    double tol_abs = 1e-15;
    double tol_rel = 1e-11;              // relative to scale
    double wavelengths_per_panel = 1.0;  // panel width in local wavelengths
    int coarse_cells = 32;               // cells used to sample |f'|
    long max_panels = 1L << 22;
};

// 16-point Gauss-Legendre on [-1, 1]
struct GaussLegendre16 {
    std::array<double, 16> x;
    std::array<double, 16> w;
};
const GaussLegendre16& gl16();

// panel breakpoints so that every panel spans at most the requested number of local wavelengths
std::vector<double> panel_breaks(const std::function<double(double)>& rate, double a, double b,
                                 const QuadOptions& opt);

// halve every panel
std::vector<double> refine_breaks(const std::vector<double>& br);

// Gauss-Legendre nodes and weights of every panel, in order
void gl_nodes(const std::vector<double>& br, std::vector<double>& x, std::vector<double>& w);

namespace detail {

struct NeumaierSum {
    cplx s{0.0, 0.0};
    cplx c{0.0, 0.0};
    void add(cplx v) {
        auto acc = [](double& sum, double& comp, double x) {
            double t = sum + x;
            if (std::fabs(sum) >= std::fabs(x))
                comp += (sum - t) + x;
            else
                comp += (x - t) + sum;
            sum = t;
        };
        double sr = s.real(), si = s.imag(), cr = c.real(), ci = c.imag();
        acc(sr, cr, v.real());
        acc(si, ci, v.imag());
        s = {sr, si};
        c = {cr, ci};
    }
    cplx value() const { return s + c; }
};

inline cplx phase_factor(double f) { return expi2pi(f); }
inline cplx phase_factor(DD f) { return expi2pi(f); }

template <class Amp, class Phase>
cplx panel_sum(const Amp& amp, const Phase& phase, const std::vector<double>& br, double& scale,
               long& evals) {
    const auto& g = gl16();
    NeumaierSum sum;
    double sc = 0.0;
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        double mid = 0.5 * (br[i] + br[i + 1]);
        double half = 0.5 * (br[i + 1] - br[i]);
        cplx ps(0.0, 0.0);
        for (int j = 0; j < 16; ++j) {
            double x = mid + half * g.x[j];
            cplx a = amp(x);
            if (a == cplx(0.0, 0.0)) continue;
            ps += g.w[j] * a * phase_factor(phase(x));
            sc += g.w[j] * half * std::abs(a);
        }
        sum.add(ps * half);
        evals += 16;
    }
    scale = sc;
    return sum.value();
}

}  // namespace detail

// integral of amp(x) e(phase(x)) over [a,b]; rate(x) = |phase'(x)| in cycles per unit
template <class Amp, class Phase, class Rate>
QuadResult integrate_oscillatory(const Amp& amp, const Phase& phase, const Rate& rate, double a,
                                 double b, const QuadOptions& opt = {}) {
    QuadResult r;
    if (!(b > a)) return r;
    std::vector<double> br = panel_breaks([&](double x) { return std::fabs(double(rate(x))); },
                                          a, b, opt);
    double scale = 0.0;
    long evals = 0;
    cplx coarse = detail::panel_sum(amp, phase, br, scale, evals);
    for (;;) {
        std::vector<double> fine_br = refine_breaks(br);
        cplx fine = detail::panel_sum(amp, phase, fine_br, scale, evals);
        r.value = fine;
        r.err_estimate = std::abs(fine - coarse);
        r.panels = long(fine_br.size()) - 1;
        r.scale = scale;
        r.evaluations = evals;
        if (r.err_estimate <= std::max(opt.tol_abs, opt.tol_rel * scale)) break;
        if (long(fine_br.size()) * 2 > opt.max_panels) {
            r.converged = false;
            break;
        }
        br.swap(fine_br);
        coarse = fine;
    }
    return r;
}

// phase derivative by central differences
template <class Amp, class Phase>
QuadResult integrate_oscillatory(const Amp& amp, const Phase& phase, double a, double b,
                                 const QuadOptions& opt = {}) {
    double h = 1e-6 * std::max(1.0, b - a);
    auto rate = [&](double x) {
        double fp = double(DD(phase(x + h)).to_double());
        double fm = double(DD(phase(x - h)).to_double());
        return (fp - fm) / (2.0 * h);
    };
    return integrate_oscillatory(amp, phase, rate, a, b, opt);
}

// type-erased entry point
QuadResult integrate_oscillatory_fn(const std::function<cplx(double)>& amp,
                                    const std::function<double(double)>& phase,
                                    const std::function<double(double)>& rate, double a, double b,
                                    const QuadOptions& opt = {});

// adaptive Gauss-Kronrod (7, 15) for smooth non-oscillatory integrands
QuadResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                              double tol_rel = 1e-12, double tol_abs = 1e-300,
                              int max_intervals = 4000);

// ---- stationary-phase lemma checkers ----

struct LemmaCheck {
    std::string name;
    bool pass = true;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    double fitted_constant = 0.0;
    double fitted_exponent = 0.0;
    double expected_exponent = 0.0;
    double exponent_tolerance = 0.0;
    std::string note;
};

// nonstationary decay: f' >= R on the support, |integral| <= C_A (b-a) Z (1/(R U))^A
LemmaCheck check_nonstationary_decay(const std::vector<double>& R_grid, double Z = 1.0);

// explicit second-derivative bound 4V/sqrt(pi lambda)
LemmaCheck check_second_derivative_test(const std::vector<double>& lambda_grid);

// two-dimensional bound V/sqrt(lambda rho)
LemmaCheck check_second_derivative_test_2d(const std::vector<double>& lambda_grid);

// lambda-scaling of the stationary-phase integral and its j-th lambda-derivative
LemmaCheck check_stationary_scaling(const std::vector<double>& lambda_grid, int j);

}  // namespace bdlab::quad
