#pragma once

#include <complex>
#include <string>
#include <vector>

#include "bdlab/forms.hpp"

namespace bdlab::lfunc {

using cplx = std::complex<double>;
using forms::CoefficientTable;
using forms::NewformDescriptor;

// C = (M / 4 pi^2) |k/2 + it| |k/2 + 1 + it|
double analytic_conductor(const NewformDescriptor& d, double t);

// Two families of cutoffs.
//  gaussian(beta): smoothed functional equation with weight e^{beta u^2} in the Mellin variable; the
//      two sums are exact, so two values of beta must agree to rounding.
//  bump(w): F(x) = rho(log x) with rho a step smoothed by the integrated bump on [-w, w], so that
//      F(x) + F(1/x) = 1; both sums cut at n / sqrt(C), which leaves an O(M^{1/2} / C^{1/4}) error.
struct Cutoff {
    enum class Kind { gaussian, bump };
    Kind kind = Kind::gaussian;
    double width = 1.0 / 16.0;

    static Cutoff gaussian(double beta);
    static Cutoff bump(double w);
    std::string id() const;
    // F(x) for the bump family
    double F(double x) const;
};

Cutoff cutoff_f1();       // gaussian, beta = 1/16
Cutoff cutoff_f2();       // gaussian, beta = 1/9
Cutoff cutoff_literal();  // bump, w = 2

struct LValuePoint {
    double t = 0.0;
    cplx value;
    double conductor = 0.0;
    std::string cutoff_id;
    long truncation_n = 0;
};

// L(1/2 + it)
LValuePoint afe_lvalue(const CoefficientTable& table, double t, const Cutoff& F = cutoff_f1());

// L(s) for any s through the gaussian family; truncation_n receives the largest n used
cplx afe_value(const CoefficientTable& table, cplx s, const Cutoff& F, long* truncation_n = nullptr);

// largest n needed by afe_value / afe_lvalue at this point
long required_n_max(const NewformDescriptor& d, cplx s, const Cutoff& F);

struct DirichletCheck {
    cplx s;
    cplx afe;
    cplx direct;  // partial sum over the whole table
    double rel_diff = 0.0;
};

// compares the functional-equation evaluation with the absolutely convergent series at s = 2 + it
DirichletCheck dirichlet_check(const CoefficientTable& table, double t);

struct WeylRow {
    double t = 0.0;
    double conductor = 0.0;
    double abs_value = 0.0;        // |L(1/2 + it)| with cutoff_f1
    double cutoff_rel_diff = 0.0;  // |L_f1 - L_f2| / |L_f1|
    double conj_diff = -1.0;       // |L(-t) - conj L(t)|; negative when not sampled
    double literal_diff = -1.0;    // |L_literal - L_f1|; negative when not sampled
    double envelope = 0.0;         // 10 M^{1/2} / C^{1/4}
    long truncation_n = 0;
};

struct SBlock {
    double t = 0.0;
    double N = 0.0;
    double abs_S = 0.0;
    double ratio = 0.0;  // |S(N)| / (sqrt(N) t^{1/3})
};

struct WeylScanOptions {
    std::vector<double> t_grid{16, 32, 64, 128, 256, 512, 1024};
    int block_points = 12;     // samples in [t, block_span t] for the block maximum
    double block_span = 1.25;
    bool s_blocks = true;
};

struct WeylReport {
    std::string label;
    std::vector<WeylRow> rows;
    std::vector<double> block_t, block_max;
    double alpha = 0.0, alpha_stderr = 0.0;
    double fit_t_min = 0.0, fit_t_max = 0.0;
    double max_cutoff_rel_diff = 0.0;
    double max_conj_diff = 0.0;
    bool literal_within_envelope = true;
    std::vector<SBlock> s_blocks;
};

// smallest table that covers weyl_scan(opt)
long weyl_required_n_max(const NewformDescriptor& d, const WeylScanOptions& opt);

WeylReport weyl_scan(const CoefficientTable& table, const WeylScanOptions& opt = {});

}  // namespace bdlab::lfunc
