#pragma once

#include <cmath>
#include <complex>

namespace bdlab {

// double-double value hi + lo with |lo| <= ulp(hi)/2
struct DD {
    double hi = 0.0;
    double lo = 0.0;
    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}
    double to_double() const { return hi + lo; }
};

inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

inline DD quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD operator+(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    DD t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD operator+(DD a, double b) {
    DD s = two_sum(a.hi, b);
    s.lo += a.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator-(DD a, double b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DD operator*(DD a, double b) {
    DD p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline DD operator/(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = a - b * q1;
    double q2 = r.hi / b.hi;
    r = r - b * q2;
    double q3 = r.hi / b.hi;
    DD q = quick_two_sum(q1, q2);
    return q + q3;
}

inline DD operator/(DD a, double b) { return a / DD(b); }

inline DD& operator+=(DD& a, DD b) { return a = a + b; }
inline DD& operator-=(DD& a, DD b) { return a = a - b; }
inline DD& operator*=(DD& a, DD b) { return a = a * b; }

inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }

namespace dd {

inline constexpr DD pi{3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr DD two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr DD half_pi{1.570796326794896558e+00, 6.123233995736766036e-17};
inline constexpr DD log2{6.931471805599452862e-01, 2.319046813846299558e-17};

inline DD abs(DD a) { return a.hi < 0 ? -a : a; }

inline DD floor(DD a) {
    double h = std::floor(a.hi);
    if (h != a.hi) return {h, 0.0};
    return quick_two_sum(h, std::floor(a.lo));
}

inline DD sqrt(DD a) {
    if (a.hi <= 0.0) return {0.0, 0.0};
    double x = 1.0 / std::sqrt(a.hi);
    double ax = a.hi * x;
    DD sq = two_prod(ax, ax);
    double corr = (a - sq).hi * (x * 0.5);
    return two_sum(ax, corr);
}

DD exp(DD a);
DD log(DD a);
// sin and cos of a together; argument reduced by 2pi in double-double
void sincos(DD a, DD& s, DD& c);
DD atan2(DD y, DD x);

// fractional part of a in [0, 1)
inline double frac(DD a) {
    DD f = a - floor(a);
    double r = f.hi + f.lo;
    if (r >= 1.0) r -= 1.0;
    if (r < 0.0) r += 1.0;
    return r;
}

// a reduced to (-pi, pi]
DD reduce_angle(DD a);

}  // namespace dd

// e(x) = exp(2 pi i x)
inline std::complex<double> expi2pi(double x) {
    double f = x - std::nearbyint(x);
    return {std::cos(2.0 * M_PI * f), std::sin(2.0 * M_PI * f)};
}

inline std::complex<double> expi2pi(DD x) {
    double f = dd::frac(x);
    if (f > 0.5) f -= 1.0;
    return {std::cos(2.0 * M_PI * f), std::sin(2.0 * M_PI * f)};
}

}  // namespace bdlab
