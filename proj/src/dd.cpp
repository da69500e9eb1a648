#include "bdlab/dd.hpp"

#include <limits>

namespace bdlab::dd {

namespace {

DD ldexp(DD a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }

// sin and cos for |t| <= pi/4 by Taylor series
void sincos_small(DD t, DD& s, DD& c) {
    DD t2 = t * t;
    DD term = t;
    s = t;
    for (int n = 1; n < 16; ++n) {
        term = term * t2 / double((2 * n) * (2 * n + 1));
        term = -term;
        s += term;
        if (std::fabs(term.hi) < 1e-33) break;
    }
    term = DD(1.0);
    c = DD(1.0);
    for (int n = 1; n < 16; ++n) {
        term = term * t2 / double((2 * n - 1) * (2 * n));
        term = -term;
        c += term;
        if (std::fabs(term.hi) < 1e-33) break;
    }
}

}  // namespace

DD exp(DD a) {
    if (a.hi > 709.0) return {std::numeric_limits<double>::infinity(), 0.0};
    if (a.hi < -745.0) return {0.0, 0.0};
    double k = std::nearbyint(a.hi / log2.hi);
    DD r = a - log2 * k;
    r = ldexp(r, -9);
    // expm1 of r by Taylor
    DD s = r;
    DD term = r;
    for (int n = 2; n < 14; ++n) {
        term = term * r / double(n);
        s += term;
        if (std::fabs(term.hi) < 1e-34) break;
    }
    for (int i = 0; i < 9; ++i) s = s * 2.0 + s * s;
    s = s + 1.0;
    return ldexp(s, int(k));
}

DD log(DD a) {
    if (a.hi <= 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    DD y(std::log(a.hi));
    return y + a * exp(-y) - 1.0;
}

DD reduce_angle(DD a) {
    double k = std::nearbyint(a.hi / two_pi.hi);
    DD r = a - two_pi * k;
    if (r.hi > pi.hi) r -= two_pi;
    if (r.hi < -pi.hi) r += two_pi;
    return r;
}

void sincos(DD a, DD& s, DD& c) {
    DD r = reduce_angle(a);
    double j = std::nearbyint(r.hi / half_pi.hi);
    DD t = r - half_pi * j;
    DD st, ct;
    sincos_small(t, st, ct);
    switch (int(j)) {
        case 0: s = st; c = ct; break;
        case 1: s = ct; c = -st; break;
        case -1: s = -ct; c = st; break;
        default: s = -st; c = -ct; break;
    }
}

DD atan2(DD y, DD x) {
    DD z(std::atan2(y.hi, x.hi));
    DD s, c;
    sincos(z, s, c);
    DD num = y * c - x * s;
    DD den = x * c + y * s;
    return z + num / den;
}

}  // namespace bdlab::dd
