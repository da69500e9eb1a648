#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "bdlab/dd.hpp"

namespace bdlab::special {

using cplx = std::complex<double>;

// ---- Bessel J of integer order ----

// x = max(20, 2 nu): above it the large-argument expansion is used
double bessel_handover(int order);

double bessel_j(int order, double x);

// ascending series summed in double-double
double bessel_j_series(int order, double x);

struct HankelExpansion {
    double P = 1.0;
    double Q = 0.0;
    double error_bound = 0.0;  // size of the first omitted term
    int terms = 0;
};

// P and Q of the large-argument expansion, truncated at the smallest term
HankelExpansion hankel_pq(int order, double x);

// J from P, Q with the phase x - (nu/2 + 1/4) pi reduced in double-double
double bessel_j_asymptotic(int order, double x, double* error_bound = nullptr);

// W+ with J_nu(x) = (e^{ix} W+ + e^{-ix} conj(W+)) / sqrt(2 pi x)
cplx hankel_amplitude(int order, double x, double* error_bound = nullptr);

// e^{-x} I_nu(x)
double bessel_i_scaled(int order, double x);

// ---- Gamma ----

struct LogGammaDD {
    DD re;
    DD im;
    cplx value() const { return {re.to_double(), im.to_double()}; }
};

// principal branch log Gamma(s)
cplx log_gamma(cplx s);
LogGammaDD log_gamma_dd(cplx s);

// Gamma(a)/Gamma(b) with the phase reduced in double-double
cplx gamma_ratio(cplx a, cplx b);

// ---- the bump U on [1,2] ----

class BumpU {
public:
    BumpU();
    explicit BumpU(const std::vector<cplx>& mellin_points);

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double left() const { return 1.0; }
    double right() const { return 2.0; }

    // cached when s was requested at construction
    cplx mellin(cplx s) const;
    double integral() const { return mellin(1.0).real(); }
    double mellin_three_quarters() const { return mellin(0.75).real(); }

private:
    std::vector<std::pair<cplx, cplx>> cache_;
};

BumpU make_bump_u();

// adaptive Gauss-Kronrod, converged to 1e-10 relative
cplx mellin_u(const BumpU& u, cplx s);

// fixed composite Gauss-Legendre rule, used as an independent check
cplx mellin_u_panels(const BumpU& u, cplx s, int panels);

// ---- smooth weight V ----

class WeightV {
public:
    WeightV(double delta, double support_right);

    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double delta() const { return delta_; }
    double left() const { return 1.0; }
    double right() const { return right_; }

private:
    double ramp(double t) const;
    double delta_;
    double right_;
};

WeightV make_weight_v(double delta, double support_right);

}  // namespace bdlab::special
