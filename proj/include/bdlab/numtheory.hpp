#pragma once

#include <cstdint>
#include <vector>

namespace bdlab::nt {

// smallest prime factor for 0..n
std::vector<int> spf_sieve(long n);

std::vector<long> primes_in(long lo, long hi);

bool is_prime(long n);

// number of divisors for 0..n
std::vector<int> divisor_counts(long n);

long gcd(long a, long b);

// a mod m in [0, m)
inline long mod(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

// inverse of a mod m; requires gcd(a, m) = 1
long inv_mod(long a, long m);

}  // namespace bdlab::nt
