#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "bdlab/quad.hpp"
#include "bdlab/special.hpp"

namespace bdlab::besseldelta {

using cplx = std::complex<double>;
using quad::QuadOptions;
using quad::QuadResult;
using special::BumpU;

// integral of U(x/X) e(sign * 2a sqrt(x)) J_{k-1}(4 pi b sqrt(x)) dx
QuadResult bessel_integral_I(double a, double b, double X, int k, const BumpU& u,
                             const QuadOptions& opt = {}, int sign = +1);

// (1+i) i^{k-1} U~(3/4) X / (4 pi (a^2 X)^{1/4})
cplx diagonal_main_term(double a, double X, int k, const BumpU& u);

struct DiagonalRow {
    double X;
    cplx value;
    cplx main;
    double diff;   // |I - main|
    double ratio;  // diff / (X / (a^2 X)^{3/4})
};

struct DiagonalReport {
    double a = 1.0;
    int k = 12;
    std::vector<DiagonalRow> rows;
    double exponent = 0.0;  // slope of log diff against log X
    double exponent_stderr = 0.0;
    double max_constant = 0.0;
    bool pass = false;
};

DiagonalReport verify_diagonal_asymptotic(int k, const BumpU& u, double a,
                                          const std::vector<double>& X_grid,
                                          const QuadOptions& opt = {});

struct OffDiagonalReport {
    double a, b, X;
    int k;
    cplx value;
    double relative;      // |I| / X
    double separation;    // |a - b| sqrt(X)
    double onset_scale;   // X^eps
    double onset_ratio;   // smallest separation / X^eps with |I| <= threshold X, scanned in b
    bool pass = false;
};

OffDiagonalReport verify_offdiagonal_decay(int k, const BumpU& u, double a, double b, double X,
                                           double threshold = 1e-8, double eps = 0.05,
                                           const QuadOptions& opt = {});

struct WeberReport {
    double a, b, X;
    int k;
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_diff = 0.0;
    double lhs_err = 0.0;
};

WeberReport weber_identity_check(double a, double b, double X, int k, const QuadOptions& opt = {});

struct HankelInversionReport {
    int k;
    double x_max;
    std::vector<double> b;
    std::vector<double> result;
    std::vector<double> target;
    double max_residual = 0.0;
    double x_cut = 0.0;  // beyond this the inner transform was below 1e-18 of its peak
};

// x dx integral over [0, x_max] of (integral of F(a) J(ax) J(bx) a da over [1,2])
HankelInversionReport hankel_inversion_check(const std::function<double(double)>& F,
                                             const std::vector<double>& b_grid, int k,
                                             double x_max, const QuadOptions& opt = {});

struct DeltaParams {
    long p;
    double N;
    double X;
    int k;
    double eps = 0.05;
    const BumpU* u;
    DeltaParams(long p, double N, double X, int k, const BumpU& u, double eps = 0.05);
};

// C_U = (1+i)/U~(3/4)
cplx c_u(const BumpU& u);

struct DeltaValue {
    cplx value;
    double err_estimate = 0.0;
    bool converged = true;
};

DeltaValue delta_identity(long r, long n, const DeltaParams& params, const QuadOptions& opt = {});

}  // namespace bdlab::besseldelta
