#include <cmath>

#include "bdlab/error.hpp"
#include "bdlab/special.hpp"

namespace bdlab::special {

namespace {

constexpr DD half_log_two_pi{0.9189385332046728, -3.8782941580672414e-17};

// B_{2m} / (2m (2m-1)) for m = 1..10
constexpr double stirling_coef[10] = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

bool is_pole(cplx s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

}  // namespace

LogGammaDD log_gamma_dd(cplx s) {
    if (is_pole(s)) throw PreconditionError("log_gamma: pole at a non-positive integer");
    int shift = 0;
    if (s.real() < 1.0) shift = int(std::ceil(1.0 - s.real()));
    while (std::abs(cplx(s.real() + shift, s.imag())) < 17.0) ++shift;

    DD zr = DD(s.real()) + double(shift);
    DD zi(s.imag());
    DD mod2 = zr * zr + zi * zi;
    DD L = dd::log(mod2) * 0.5;
    DD A = dd::atan2(zi, zr);
    DD zh = zr - 0.5;
    LogGammaDD r;
    r.re = zh * L - zi * A - zr + half_log_two_pi;
    r.im = zh * A + zi * L - zi;

    cplx z(zr.to_double(), zi.to_double());
    cplx inv = 1.0 / z;
    cplx inv2 = inv * inv;
    cplx pw = inv;
    cplx corr = 0.0;
    for (double c : stirling_coef) {
        corr += c * pw;
        pw *= inv2;
    }
    cplx back = 0.0;
    for (int j = 0; j < shift; ++j) back += std::log(s + double(j));
    corr -= back;
    r.re += corr.real();
    r.im += corr.imag();
    return r;
}

cplx log_gamma(cplx s) { return log_gamma_dd(s).value(); }

cplx gamma_ratio(cplx a, cplx b) {
    LogGammaDD la = log_gamma_dd(a);
    LogGammaDD lb = log_gamma_dd(b);
    double re = (la.re - lb.re).to_double();
    double im = dd::reduce_angle(la.im - lb.im).to_double();
    return std::exp(re) * cplx(std::cos(im), std::sin(im));
}

}  // namespace bdlab::special
