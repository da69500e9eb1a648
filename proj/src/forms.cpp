#include "bdlab/forms.hpp"

#include <cmath>
#include <sstream>

#include "bdlab/error.hpp"
#include "bdlab/numtheory.hpp"

namespace bdlab::forms {

namespace {

std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    std::string s;
    while (v != 0) {
        int d = int(v % 10);
        s.push_back(char('0' + (d < 0 ? -d : d)));
        v /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

void overflow(const char* what, long n) {
    std::ostringstream os;
    os << what << ": 128-bit overflow at n = " << n << " (big-integer arithmetic required)";
    throw NumericalError(os.str());
}

i128 add_checked(i128 a, i128 b, const char* what, long n) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) overflow(what, n);
    return r;
}

i128 mul_checked(i128 a, i128 b, const char* what, long n) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) overflow(what, n);
    return r;
}

struct SparseTerm {
    long exp;
    int sign;
};

// Euler's function prod (1 - q^n) = sum (-1)^m q^{m(3m-1)/2}
std::vector<SparseTerm> pentagonal(long deg, long step = 1) {
    std::vector<SparseTerm> t{{0, 1}};
    for (long m = 1;; ++m) {
        long e1 = m * (3 * m - 1) / 2 * step;
        long e2 = m * (3 * m + 1) / 2 * step;
        if (e1 > deg) break;
        int s = (m % 2 == 0) ? 1 : -1;
        t.push_back({e1, s});
        if (e2 <= deg) t.push_back({e2, s});
    }
    return t;
}

// p <- p * sparse, in place
void mul_sparse(std::vector<i128>& p, const std::vector<SparseTerm>& sp, const char* what) {
    long deg = long(p.size()) - 1;
    for (long n = deg; n >= 0; --n) {
        i128 acc = p[n];
        for (const auto& t : sp) {
            if (t.exp == 0) continue;
            if (t.exp > n) continue;
            i128 v = p[n - t.exp];
            acc = add_checked(acc, t.sign > 0 ? v : -v, what, n + 1);
        }
        p[n] = acc;
    }
}

double normalized(i128 a, long n, int k) {
    long double v = (long double)a;
    return double(v / std::pow((long double)n, (long double)(k - 1) / 2.0L));
}

}  // namespace

cplx NewformDescriptor::eps() const {
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return ipow[((k % 4) + 4) % 4] * eta;
}

NewformDescriptor descriptor_delta() {
    NewformDescriptor d;
    d.label = "delta";
    d.M = 1;
    d.k = 12;
    return d;
}

NewformDescriptor descriptor_11a() {
    NewformDescriptor d;
    d.label = "11a";
    d.M = 11;
    d.k = 2;
    return d;
}

CoefficientTable::CoefficientTable(NewformDescriptor d, std::vector<i128> raw) : desc_(std::move(d)) {
    if (raw.empty()) throw PreconditionError("CoefficientTable: empty coefficient list");
    n_max_ = long(raw.size()) - 1;
    std::vector<double> lam(raw.size(), 0.0);
    for (long n = 1; n <= n_max_; ++n) lam[n] = normalized(raw[n], n, desc_.k);
    raw_ = std::make_shared<const std::vector<i128>>(std::move(raw));
    lambda_ = std::make_shared<const std::vector<double>>(std::move(lam));
}

CoefficientTable::CoefficientTable(NewformDescriptor d, std::vector<double> lambda)
    : desc_(std::move(d)) {
    if (lambda.empty()) throw PreconditionError("CoefficientTable: empty coefficient list");
    n_max_ = long(lambda.size()) - 1;
    lambda_ = std::make_shared<const std::vector<double>>(std::move(lambda));
}

i128 CoefficientTable::raw(long n) const { return raws()[n]; }

const std::vector<i128>& CoefficientTable::raws() const {
    if (!raw_) throw PreconditionError("CoefficientTable: table is not integer-backed");
    return *raw_;
}

CoefficientTable CoefficientTable::with_eta(cplx eta) const {
    CoefficientTable t = *this;
    t.desc_.eta = eta;
    t.desc_.eta_calibrated = true;
    return t;
}

std::vector<i128> tau_by_pentagonal(long n_max) {
    if (n_max < 1) throw PreconditionError("coefficients_delta: n_max must be >= 1");
    std::vector<i128> p(n_max, 0);
    p[0] = 1;
    auto sp = pentagonal(n_max - 1);
    for (int j = 0; j < 24; ++j) mul_sparse(p, sp, "tau");
    std::vector<i128> tau(n_max + 1, 0);
    for (long n = 1; n <= n_max; ++n) tau[n] = p[n - 1];
    return tau;
}

std::vector<i128> tau_by_dense_product(long n_max) {
    std::vector<i128> p(n_max, 0);
    p[0] = 1;
    for (long j = 1; j < n_max; ++j)
        for (int r = 0; r < 24; ++r)
            for (long n = n_max - 1; n >= j; --n) p[n] -= p[n - j];
    std::vector<i128> tau(n_max + 1, 0);
    for (long n = 1; n <= n_max; ++n) tau[n] = p[n - 1];
    return tau;
}

std::vector<i128> eta_product_11a(long n_max) {
    std::vector<i128> p(n_max, 0);
    p[0] = 1;
    auto e1 = pentagonal(n_max - 1);
    auto e11 = pentagonal(n_max - 1, 11);
    for (int j = 0; j < 2; ++j) mul_sparse(p, e1, "eta product");
    for (int j = 0; j < 2; ++j) mul_sparse(p, e11, "eta product");
    std::vector<i128> a(n_max + 1, 0);
    for (long n = 1; n <= n_max; ++n) a[n] = p[n - 1];
    return a;
}

long ap_11a(long p) {
    if (!nt::is_prime(p)) throw PreconditionError("ap_11a: input " + std::to_string(p) + " is not prime");
    if (p == 11) throw PreconditionError("ap_11a: 11 is the bad prime (a_11 = 1 by convention)");
    auto rhs = [p](long x) { return nt::mod(((x * x % p) * x) % p - x * x % p - 10 * x - 20, p); };
    long count = 1;  // point at infinity
    if (p == 2) {
        for (long x = 0; x < 2; ++x)
            for (long y = 0; y < 2; ++y)
                if (nt::mod(y * y + y - rhs(x), 2) == 0) ++count;
        return p + 1 - count;
    }
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    for (long y = 1; y < p; ++y) chi[y * y % p] = 1;
    // y^2 + y = r  <=>  (2y+1)^2 = 4r + 1
    for (long x = 0; x < p; ++x) count += 1 + chi[nt::mod(4 * rhs(x) + 1, p)];
    return p + 1 - count;
}

CoefficientTable hecke_extend(const std::map<long, i128>& prime_values, int M, int k, long n_max,
                              NewformDescriptor d) {
    if (n_max < 1) throw PreconditionError("hecke_extend: n_max must be >= 1");
    if (d.label.empty()) {
        d.label = "custom";
        d.M = M;
        d.k = k;
    }
    auto spf = nt::spf_sieve(n_max);
    std::vector<i128> a(n_max + 1, 0);
    a[1] = 1;
    for (long n = 2; n <= n_max; ++n) {
        long p = spf[n];
        long pe = p;
        long m = n / p;
        int e = 1;
        while (m % p == 0) {
            m /= p;
            pe *= p;
            ++e;
        }
        if (m > 1) {
            a[n] = mul_checked(a[pe], a[m], "hecke_extend", n);
            continue;
        }
        if (e == 1) {
            auto it = prime_values.find(p);
            if (it == prime_values.end())
                throw PreconditionError("hecke_extend: missing value for prime " + std::to_string(p));
            a[n] = it->second;
            continue;
        }
        i128 ap = a[p];
        i128 v = mul_checked(ap, a[pe / p], "hecke_extend", n);
        if (M % p != 0) {
            i128 pk = 1;
            for (int j = 0; j < k - 1; ++j) pk = mul_checked(pk, p, "hecke_extend", n);
            v = add_checked(v, -mul_checked(pk, a[pe / p / p], "hecke_extend", n), "hecke_extend", n);
        }
        a[n] = v;
    }
    return CoefficientTable(d, std::move(a));
}

CoefficientTable coefficients_delta(long n_max) {
    return CoefficientTable(descriptor_delta(), tau_by_pentagonal(n_max));
}

CoefficientTable coefficients_11a(long n_max) {
    if (n_max < 1) throw PreconditionError("coefficients_11a: n_max must be >= 1");
    std::map<long, i128> ap;
    for (long p : nt::primes_in(2, n_max)) ap[p] = (p == 11) ? 1 : ap_11a(p);
    CoefficientTable t = hecke_extend(ap, 11, 2, n_max, descriptor_11a());
    long check = std::min(n_max, 1000L);
    auto oracle = eta_product_11a(check);
    for (long n = 1; n <= check; ++n)
        if (oracle[n] != t.raw(n)) {
            std::ostringstream os;
            os << "coefficients_11a: point count and eta product disagree at n = " << n << " ("
               << to_string(t.raw(n)) << " vs " << to_string(oracle[n]) << ")";
            throw NumericalError(os.str());
        }
    return t;
}

RamanujanReport ramanujan_report(const CoefficientTable& t) {
    RamanujanReport r;
    auto d = nt::divisor_counts(t.n_max());
    double s2 = 0.0;
    long next = 1;
    for (long n = 1; n <= t.n_max(); ++n) {
        double ratio = std::fabs(t[n]) / d[n];
        if (ratio > r.max_ratio) {
            r.max_ratio = ratio;
            r.argmax = n;
        }
        s2 += t[n] * t[n];
        if (n == next) {
            r.dyadic_N.push_back(n);
            r.mean_square.push_back(s2 / n);
            next *= 2;
        }
    }
    return r;
}

CoefficientTable coefficients_by_label(const std::string& label, long n_max) {
    if (label == "delta") return coefficients_delta(n_max);
    if (label == "11a") return coefficients_11a(n_max);
    throw PreconditionError("unknown form label '" + label + "' (expected delta or 11a)");
}

}  // namespace bdlab::forms
