#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace bdlab::forms {

using cplx = std::complex<double>;
using i128 = __int128;

struct NewformDescriptor {
    std::string label;
    int M = 1;
    int k = 12;
    bool nebentypus_trivial = true;
    cplx eta{1.0, 0.0};
    bool eta_calibrated = false;

    // root number i^k eta
    cplx eps() const;
};

NewformDescriptor descriptor_delta();
NewformDescriptor descriptor_11a();

enum class Encoding { integer, float64 };

class CoefficientTable {
public:
    CoefficientTable() = default;
    // integer-backed: a(n) with lambda(n) = a(n) / n^{(k-1)/2}
    CoefficientTable(NewformDescriptor d, std::vector<i128> raw);
    CoefficientTable(NewformDescriptor d, std::vector<double> lambda);

    const NewformDescriptor& descriptor() const { return desc_; }
    long n_max() const { return n_max_; }
    Encoding encoding() const { return raw_ ? Encoding::integer : Encoding::float64; }
    double operator[](long n) const { return (*lambda_)[n]; }
    double lambda(long n) const { return (*lambda_)[n]; }
    const std::vector<double>& lambdas() const { return *lambda_; }
    // raw integer coefficient; only for integer-backed tables
    i128 raw(long n) const;
    const std::vector<i128>& raws() const;

    // same coefficients, different calibration
    CoefficientTable with_eta(cplx eta) const;

private:
    NewformDescriptor desc_;
    long n_max_ = 0;
    std::shared_ptr<const std::vector<double>> lambda_;
    std::shared_ptr<const std::vector<i128>> raw_;
};

// tau(n) from q prod (1-q^n)^24 using the pentagonal number theorem
CoefficientTable coefficients_delta(long n_max);

// y^2 + y = x^3 - x^2 - 10x - 20
CoefficientTable coefficients_11a(long n_max);

// a_p = p + 1 - #E(F_p) for the curve above; p must be prime and not 11
long ap_11a(long p);

// extend prime values multiplicatively with the Hecke recursion at level M, weight k
CoefficientTable hecke_extend(const std::map<long, i128>& prime_values, int M, int k, long n_max,
                              NewformDescriptor d = {});

// q-expansion oracles
std::vector<i128> tau_by_pentagonal(long n_max);
std::vector<i128> tau_by_dense_product(long n_max);
std::vector<i128> eta_product_11a(long n_max);

struct RamanujanReport {
    double max_ratio = 0.0;  // max |lambda(n)| / d(n)
    long argmax = 1;
    std::vector<long> dyadic_N;
    std::vector<double> mean_square;  // sum_{n <= N} lambda(n)^2 / N
};

RamanujanReport ramanujan_report(const CoefficientTable& t);

// built-in forms by label: "delta" or "11a"
CoefficientTable coefficients_by_label(const std::string& label, long n_max);

}  // namespace bdlab::forms
