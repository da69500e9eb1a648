#include <cmath>
#include <sstream>
#include <vector>

#include "bdlab/error.hpp"
#include "bdlab/special.hpp"

namespace bdlab::special {

namespace {

void check_args(int order, double x) {
    if (order < 0 || order > 64) throw PreconditionError("bessel: order must be in [0, 64]");
    if (!(x >= 0.0) || x > 1e9) throw PreconditionError("bessel: x must be in [0, 1e9]");
}

DD log_factorial(int n) {
    DD s(0.0);
    for (int j = 2; j <= n; ++j) s += dd::log(DD(double(j)));
    return s;
}

// J_0 and J_1 from the expansion, then upward recurrence (stable for nu < x)
double bessel_j_forward(int order, double x) {
    double j0 = bessel_j_asymptotic(0, x);
    if (order == 0) return j0;
    double j1 = bessel_j_asymptotic(1, x);
    double prev = j0, cur = j1;
    for (int n = 1; n < order; ++n) {
        double next = (2.0 * n / x) * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace

double bessel_handover(int order) { return std::max(20.0, 2.0 * order); }

double bessel_j_series(int order, double x) {
    check_args(order, x);
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    DD half(x * 0.5);
    DD term(1.0);
    for (int j = 1; j <= order; ++j) term = term * half / double(j);
    DD q = half * half;
    DD sum = term;
    for (int m = 1; m < 2000; ++m) {
        term = -(term * q) / double(m * (m + order));
        sum += term;
        if (m > x && std::fabs(term.hi) < 1e-33 * std::fabs(sum.hi)) break;
        if (sum.hi == 0.0 && term.hi == 0.0) break;
    }
    return sum.to_double();
}

HankelExpansion hankel_pq(int order, double x) {
    // terms c_k = a_k(nu) / x^k; once (2k-1)^2 > 4 nu^2 the ratio grows with k, so stop at the
    // first increase past that point and truncate at the smallest term
    double mu = 4.0 * order * order;
    std::vector<double> c{1.0};
    size_t best = 0;
    double biggest = 1.0;
    for (int k = 1; k < 400; ++k) {
        double odd = 2.0 * k - 1.0;
        double next = c.back() * (mu - odd * odd) / (8.0 * k * x);
        c.push_back(next);
        double a = std::fabs(next);
        biggest = std::max(biggest, a);
        if (a < std::fabs(c[best])) best = c.size() - 1;
        if (a == 0.0 || a < 1e-18 * biggest) break;
        if (odd * odd > mu && a > std::fabs(c[c.size() - 2])) break;
    }
    HankelExpansion r;
    double P = 0.0, Q = 0.0;
    for (size_t k = 0; k < best; ++k) {
        // c_k enters P (even k) or Q (odd k) with sign (-1)^{floor(k/2)}
        double sgn = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            P += sgn * c[k];
        else
            Q += sgn * c[k];
    }
    r.P = P;
    r.Q = Q;
    r.error_bound = std::fabs(c[best]) + 4e-16 * biggest;
    r.terms = int(best);
    return r;
}

double bessel_j_asymptotic(int order, double x, double* error_bound) {
    HankelExpansion h = hankel_pq(order, x);
    DD chi = DD(x) - dd::pi * (0.5 * order + 0.25);
    chi = dd::reduce_angle(chi);
    double ch = chi.to_double();
    double amp = std::sqrt(2.0 / (M_PI * x));
    if (error_bound) *error_bound = amp * h.error_bound;
    return amp * (h.P * std::cos(ch) - h.Q * std::sin(ch));
}

cplx hankel_amplitude(int order, double x, double* error_bound) {
    HankelExpansion h = hankel_pq(order, x);
    if (error_bound) *error_bound = h.error_bound;
    DD ph = dd::reduce_angle(-(dd::pi * (0.5 * order + 0.25)));
    double p = ph.to_double();
    return cplx(std::cos(p), std::sin(p)) * cplx(h.P, h.Q);
}

double bessel_j(int order, double x) {
    check_args(order, x);
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    if (x <= std::max(20.0, double(order))) return bessel_j_series(order, x);
    if (x >= bessel_handover(order)) {
        double err = 0.0;
        double v = bessel_j_asymptotic(order, x, &err);
        if (err <= 1e-14) return v;
    }
    double v = bessel_j_forward(order, x);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "bessel_j: no branch reached the target accuracy at order " << order << ", x " << x;
        throw NumericalError(os.str());
    }
    return v;
}

double bessel_i_scaled(int order, double x) {
    check_args(order, x);
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    // large argument: e^{-x} I = (1/sqrt(2 pi x)) sum (-1)^k a_k / x^k
    if (x >= 30.0) {
        double mu = 4.0 * order * order;
        double c = 1.0, sum = 1.0, prev = 1.0;
        bool ok = false;
        for (int k = 1; k < 400; ++k) {
            double odd = 2.0 * k - 1.0;
            double next = -c * (mu - odd * odd) / (8.0 * k * x);
            double a = std::fabs(next);
            if (a > prev) break;
            c = next;
            sum += c;
            prev = a;
            if (a < 1e-17 * std::fabs(sum)) {
                ok = true;
                break;
            }
        }
        if (ok) return sum / std::sqrt(2.0 * M_PI * x);
    }
    if (x > 20000.0) throw NumericalError("bessel_i_scaled: argument outside the supported range");
    // ascending series with all terms positive; prefactor built in double-double
    DD hx(0.5 * x);
    DD logt0 = dd::log(hx) * double(order) - log_factorial(order) - DD(x);
    DD term = dd::exp(logt0);
    DD q = hx * hx;
    DD sum = term;
    for (int m = 1; m < 100000; ++m) {
        term = term * q / double(m) / double(m + order);
        sum += term;
        if (m > x && term.hi < 1e-33 * sum.hi) break;
    }
    return sum.to_double();
}

}  // namespace bdlab::special
