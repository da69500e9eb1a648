#include "bdlab/numtheory.hpp"

#include "bdlab/error.hpp"

namespace bdlab::nt {

std::vector<int> spf_sieve(long n) {
    std::vector<int> spf(n + 1, 0);
    for (long i = 2; i <= n; ++i) {
        if (spf[i] != 0) continue;
        for (long j = i; j <= n; j += i)
            if (spf[j] == 0) spf[j] = int(i);
    }
    return spf;
}

std::vector<long> primes_in(long lo, long hi) {
    std::vector<long> out;
    if (hi < 2) return out;
    std::vector<char> comp(hi + 1, 0);
    for (long i = 2; i * i <= hi; ++i)
        if (!comp[i])
            for (long j = i * i; j <= hi; j += i) comp[j] = 1;
    for (long i = std::max(2L, lo); i <= hi; ++i)
        if (!comp[i]) out.push_back(i);
    return out;
}

bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

std::vector<int> divisor_counts(long n) {
    std::vector<int> d(n + 1, 0);
    for (long i = 1; i <= n; ++i)
        for (long j = i; j <= n; j += i) ++d[j];
    return d;
}

long gcd(long a, long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

long inv_mod(long a, long m) {
    long g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1) {
        long q = g / a1;
        long t = g - q * a1;
        g = a1;
        a1 = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    if (g != 1) throw PreconditionError("inv_mod: argument not invertible");
    return mod(x, m);
}

}  // namespace bdlab::nt
