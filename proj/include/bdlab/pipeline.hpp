#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "bdlab/dd.hpp"
#include "bdlab/forms.hpp"
#include "bdlab/quad.hpp"
#include "bdlab/special.hpp"

namespace bdlab::pipeline {

using cplx = std::complex<double>;
using forms::CoefficientTable;
using quad::QuadOptions;
using quad::QuadResult;
using special::BumpU;
using special::WeightV;

// ---- phases ----

enum class PhiKind { neg_log, power };

// f(x) = T phi(x/N) + gamma x
class PhaseSpec {
public:
    PhaseSpec(double T, double gamma, double N, PhiKind kind = PhiKind::neg_log, double beta = 0.0,
              double sign = 1.0);

    double T() const { return T_; }
    double gamma() const { return gamma_; }
    double N() const { return N_; }
    PhiKind kind() const { return kind_; }
    double beta() const { return beta_; }

    double phi(double x) const;
    double phi1(double x) const;
    double phi2(double x) const;
    // min |phi''| over [1/2, 5/2]
    double c0() const { return c0_; }

    // f(n) reduced mod 1, computed in double-double
    DD value_mod1(double n) const;
    std::string describe() const;

private:
    double T_, gamma_, N_;
    PhiKind kind_;
    double beta_, sign_;
    double c0_ = 0.0;
};

// throws unless N^eps * delta <= T (skipped when T = 0)
void check_pairing(const PhaseSpec& f, const WeightV& v, double eps = 0.05);

// ---- Kloosterman sums ----

double kloosterman(long n, long r, long p);

// S(n, r; p) for one prime, tabulated through S(1, m; p)
class KloostermanTable {
public:
    explicit KloostermanTable(long p);
    long p() const { return p_; }
    double operator()(long n, long r) const;

private:
    long p_;
    std::vector<double> s1_;  // S(1, m; p)
};

// ---- Voronoi ----

struct VoronoiReport {
    std::string label;
    long a = 1, c = 1;
    double Y = 0.0;
    cplx eta{1.0, 0.0};
    cplx lhs, rhs;
    double rel_diff = 0.0;
    long dual_terms = 0;
    bool truncated = true;  // the dual sum reached the 1e-12 tail rule
};

// smooth weight supported in [1,2]; F(x) = G(x / Y)
using Profile = std::function<double(double)>;

// both sides of the Voronoi formula for F = G(x/Y)
VoronoiReport voronoi_check(const CoefficientTable& t, long a, long c, double Y, cplx eta,
                            const Profile& G = {}, const QuadOptions& opt = {});

struct EtaCalibration {
    cplx eta;
    long c;
    double winner_residual;
    double loser_residual;
};

// tries eta = +1 and -1; throws on an ambiguous outcome
EtaCalibration calibrate_eta(const CoefficientTable& t, long c, double Y = 1000.0,
                             const QuadOptions& opt = {});

struct InvolutionReport {
    cplx original;
    cplx twice;
    double rel_diff;
    long nodes;
};

// applies the dual-side construction twice and compares with the original sum
InvolutionReport voronoi_involution(const CoefficientTable& t, long a, long c, double Y, cplx eta);

// ---- sums ----

cplx s_direct(const CoefficientTable& t, const PhaseSpec& f, const WeightV& v);
// sum over N <= n <= 2N with no weight
cplx s_sharp(const CoefficientTable& t, const PhaseSpec& f);

// V_natural(x) = C_U eta xi(-1) M^{-1/2} x^{1/4} V(x)
class VNatural {
public:
    VNatural(const WeightV& v, cplx constant) : v_(&v), c_(constant) {}
    static VNatural make(const WeightV& v, const BumpU& u, cplx eta, int M, int k);
    cplx operator()(double x) const { return c_ * std::pow(x, 0.25) * (*v_)(x); }
    double abs_integral() const;
    cplx constant() const { return c_; }
    const WeightV& weight() const { return *v_; }

private:
    const WeightV* v_;
    cplx c_;
};

// ---- the J, K and L integrals ----

// J(y, r, p) = integral of Vn(x) e(T phi(x) + gamma N x + 2 sqrt(N x y)/(sqrt(M) p) - r N x / p)
QuadResult j_integral(double y, double r, long p, const PhaseSpec& f, const VNatural& vn, int M = 1,
                      const QuadOptions& opt = {});

struct PoissonReport {
    long n, p;
    double cap;
    cplx lhs, rhs, rhs_double_cap;
    double rel_diff;
    double cap_stability;  // |rhs(2 cap) - rhs(cap)| / |rhs|
    double edge_ratio;     // max |J| at the cap edges relative to max |J|
    long r_terms;
    bool cap_ok;
};

PoissonReport poisson_r_identity_check(long n, long p, const PhaseSpec& f, const VNatural& vn, double P,
                                       int M = 1, const QuadOptions& opt = {});

// K(wK, x) = integral of U(y) e(2 wK sqrt(y) - x y)
QuadResult k_integral(double w, double K, double x, const BumpU& u, const QuadOptions& opt = {});

struct KCheckReport {
    double K;
    double negligible_max;    // max |K(wK, x)| / integral(U) over |x| >= 2K samples
    double window_max;        // same, outside 2/3 < wK/x < 3/2
    std::vector<double> x_grid;
    std::vector<std::vector<double>> w_bounds;  // [j][x] max over lambda of lambda^j |W^(j)| sqrt(x)
    double uniformity;        // max over j of (last / first) in w_bounds
    double collapse_defect;   // spread of K(wK, 0) at fixed wK
    bool pass;
};

KCheckReport k_lemma_checks(const BumpU& u, double threshold = 1e-8);

struct LFamilyMember {
    long p;
    long r;
};

// precomputed J(MXy, r, p) on a two-level y grid, so that every L(x) is a y-sum
class LEngine {
public:
    LEngine(const PhaseSpec& f, const VNatural& vn, double K, double P, int M,
            std::vector<LFamilyMember> family, const QuadOptions& opt = {});
    const std::vector<LFamilyMember>& family() const { return family_; }
    double X() const { return X_; }
    double K() const { return K_; }
    double P() const { return P_; }
    double T() const { return T_; }
    double N() const { return N_; }
    // L(x; r_i, r_j, p_i, p_j) on the fine grid, with the coarse-grid difference as error estimate
    QuadResult value(double x, size_t i, size_t j) const;
    double natural_scale() const { return scale_; }
    long j_evaluations() const { return j_evals_; }

private:
    std::vector<LFamilyMember> family_;
    double K_, P_, X_, T_, N_;
    double scale_ = 0.0;
    long j_evals_ = 0;
    struct Level {
        std::vector<double> y, w;
        std::vector<std::vector<cplx>> J;  // [member][node], weight and U(y) folded into w
    };
    Level coarse_, fine_;
};

// geometric grid on [K^2/T, K/2]
std::vector<double> l_mid_grid(double K, double T, int points = 10);

// one member per prime in [P, 2P] with r stationary at v = y = 3/2, plus a second r for the first prime
std::vector<LFamilyMember> stationary_family(const PhaseSpec& f, double K, double P, int M, int max_primes = 16);

struct LCheckReport {
    double T, K, P, N, X;
    double max_LT;               // max |L| T over all x and pairs
    double negligible_max;       // max |L| / scale over |x| >= 2K
    std::vector<double> x_mid;   // mid-range grid, l_mid_grid(K, T)
    std::vector<double> envelope;
    double exponent;
    double exponent_stderr;
    double mid_constant;         // max |L| T sqrt|x| over the mid range
    double zero_constant;        // max |L(0)| / min(1/T, P/(K N |r1-r2|)) over p1 = p2 pairs
    bool pass;
};

LCheckReport l_lemma_checks(const LEngine& e, double threshold = 1e-8);

// ---- decomposition ----

struct DecompositionReport {
    double N, X, P, K;
    std::vector<long> primes;
    long p_star = 0;
    cplx s_direct;
    cplx s_decomposed;   // S(N, X, P)
    cplx s_zero_freq;    // prime average of the zero-frequency terms
    double residual = 0.0;             // |S(N) - S(N,X,P) - zero-frequency average|
    double residual_without_zero = 0.0;
    double envelope = 0.0;             // P sqrt(N/X) + N^{5/4} X^{1/4} / P^{3/2}
    double ratio = 0.0;                // residual / envelope
    double cauchy_schwarz_lhs = 0.0;   // |S(N,X,P)|
    double cauchy_schwarz_rhs = 0.0;   // square root of the opened square after Poisson in r
    std::vector<std::string> violations;
    long terms = 0;
};

struct DecompositionOptions {
    double eps = 0.05;
    bool strict = false;  // hypothesis violations throw instead of being recorded
    bool cauchy_schwarz = false;
};

DecompositionReport s_decomposed(const CoefficientTable& t, const PhaseSpec& f, const WeightV& v, double K,
                                 double P, const BumpU& u, const DecompositionOptions& opt = {});

// ---- bound ledger ----

struct BoundLedger {
    double N, T, K, P, R, X;
    long p_star;
    double s_diag_sq;
    double diag_estimate;       // (K N + T) log P
    double s_off_sq_split;      // by split congruences
    double s_off_sq_brute;      // by direct enumeration; negative when skipped
    double off_estimate;        // (N T / sqrt K + K N)(1 + N/T) log P
    double off_branch_estimate; // the T >= N or T < N branch
    bool t_at_least_n;
    double sharp_abs;           // |S_sharp(N)|
    double theorem_bound;       // T^{1/3} N^{1/2} + N / T^{1/6}
    double sharp_ratio;
};

BoundLedger bound_ledger(const CoefficientTable& t, double N, double T, double gamma = 0.0,
                         double brute_force_limit = 3e8);

struct WiltonReport {
    std::vector<double> N;
    std::vector<double> max_ratio;  // max over gamma of |S_sharp| / (sqrt N log 2N)
    double constant;
};

WiltonReport wilton_check(const CoefficientTable& t, const std::vector<double>& N_grid, int gamma_points = 50);

}  // namespace bdlab::pipeline
