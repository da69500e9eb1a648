#include "bdlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bdlab/error.hpp"
#include "bdlab/fit.hpp"
#include "bdlab/numtheory.hpp"
#include "bdlab/parallel.hpp"

namespace bdlab::pipeline {

namespace {

const cplx I1(0.0, 1.0);

cplx ipow(int k) {
    static const cplx t[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return t[((k % 4) + 4) % 4];
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void require_table(const CoefficientTable& t, double n_top, const char* what) {
    if (double(t.n_max()) < n_top) {
        std::ostringstream os;
        os << what << ": coefficient table has n_max = " << t.n_max() << " but n up to "
           << long(std::ceil(n_top)) << " is required";
        throw PreconditionError(os.str());
    }
}

// integers m with |m - center| <= R
std::pair<long, long> window(double center, double R) {
    return {long(std::ceil(center - R - 1e-9)), long(std::floor(center + R + 1e-9))};
}

// count of m in [lo, hi] with m = c mod q
long count_class(long lo, long hi, long c, long q) {
    if (hi < lo) return 0;
    auto upto = [&](long x) {  // floor((x - c) / q)
        long d = x - nt::mod(c, q);
        return (d - nt::mod(d, q)) / q;
    };
    return upto(hi) - upto(lo - 1);
}

}  // namespace

// ---- PhaseSpec ----

PhaseSpec::PhaseSpec(double T, double gamma, double N, PhiKind kind, double beta, double sign)
    : T_(T), gamma_(gamma), N_(N), kind_(kind), beta_(beta), sign_(sign >= 0 ? 1.0 : -1.0) {
    if (!(T >= 0.0)) throw PreconditionError("PhaseSpec: T must be >= 0");
    if (!(N >= 1.0)) throw PreconditionError("PhaseSpec: N must be >= 1");
    if (kind == PhiKind::power && (beta == 0.0 || beta == 1.0))
        throw PreconditionError("PhaseSpec: power phase needs beta outside {0, 1}");
    c0_ = 1e300;
    for (int i = 0; i <= 2000; ++i) c0_ = std::min(c0_, std::fabs(phi2(0.5 + 2.0 * i / 2000.0)));
    if (!(c0_ > 0.0)) throw PreconditionError("PhaseSpec: phi'' vanishes on [1/2, 5/2]");
}

double PhaseSpec::phi(double x) const {
    return kind_ == PhiKind::neg_log ? -std::log(x) : sign_ * std::pow(x, beta_);
}

double PhaseSpec::phi1(double x) const {
    return kind_ == PhiKind::neg_log ? -1.0 / x : sign_ * beta_ * std::pow(x, beta_ - 1.0);
}

double PhaseSpec::phi2(double x) const {
    return kind_ == PhiKind::neg_log ? 1.0 / (x * x) : sign_ * beta_ * (beta_ - 1.0) * std::pow(x, beta_ - 2.0);
}

DD PhaseSpec::value_mod1(double n) const {
    DD f = two_prod(gamma_, n);
    if (T_ != 0.0) {
        DD l = dd::log(DD(n) / DD(N_));
        DD p = kind_ == PhiKind::neg_log ? -l : dd::exp(l * beta_) * sign_;
        f += p * T_;
    }
    return f - dd::floor(f);
}

std::string PhaseSpec::describe() const {
    std::ostringstream os;
    os << "T=" << T_ << " gamma=" << gamma_ << " N=" << N_ << " phi=";
    if (kind_ == PhiKind::neg_log)
        os << "-log";
    else
        os << (sign_ < 0 ? "-" : "") << "x^" << beta_;
    return os.str();
}

void check_pairing(const PhaseSpec& f, const WeightV& v, double eps) {
    if (f.T() == 0.0) return;
    double lim = f.T() / std::pow(f.N(), eps);
    if (v.delta() > lim) {
        std::ostringstream os;
        os << "weight/phase pairing: Delta = " << v.delta() << " exceeds T/N^eps = " << lim;
        throw PreconditionError(os.str());
    }
}

// ---- Kloosterman ----

double kloosterman(long n, long r, long p) {
    if (!nt::is_prime(p)) throw PreconditionError("kloosterman: modulus " + std::to_string(p) + " is not prime");
    double re = 0.0, im = 0.0;
    long nn = nt::mod(n, p), rr = nt::mod(r, p);
    for (long a = 1; a < p; ++a) {
        long m = (a * nn + nt::inv_mod(a, p) * rr) % p;
        double th = 2.0 * M_PI * double(m) / double(p);
        re += std::cos(th);
        im += std::sin(th);
    }
    if (std::fabs(im) > 1e-10 * std::max(1.0, double(p)))
        throw NumericalError("kloosterman: imaginary part " + fmt(im) + " exceeds tolerance");
    return re;
}

KloostermanTable::KloostermanTable(long p) : p_(p), s1_(p, 0.0) {
    if (!nt::is_prime(p)) throw PreconditionError("KloostermanTable: modulus " + std::to_string(p) + " is not prime");
    std::vector<long> inv(p, 0);
    inv[1] = 1;
    for (long a = 2; a < p; ++a) inv[a] = nt::mod(-(p / a) * inv[p % a], p);
    std::vector<double> c(p);
    for (long j = 0; j < p; ++j) c[j] = std::cos(2.0 * M_PI * double(j) / double(p));
    for (long m = 0; m < p; ++m) {
        double s = 0.0;
        for (long a = 1; a < p; ++a) s += c[(a + inv[a] * m) % p];
        s1_[m] = s;
    }
}

double KloostermanTable::operator()(long n, long r) const {
    long nn = nt::mod(n, p_), rr = nt::mod(r, p_);
    if (nn == 0) return rr == 0 ? double(p_ - 1) : -1.0;
    return s1_[(nn * rr) % p_];
}

// ---- Voronoi ----

namespace {

const BumpU& default_bump() {
    static const BumpU u = special::make_bump_u();
    return u;
}

// 2 pi i^k Y integral of G(t) J_{k-1}(4 pi sqrt(Y y t)) dt over [1,2]
cplx hankel_profile(const Profile& G, double Y, double y, int k, const QuadOptions& opt) {
    double zs = 4.0 * M_PI * std::sqrt(Y * y);
    auto amp = [&](double t) -> cplx {
        double g = G(t);
        if (g == 0.0) return 0.0;
        return g * special::bessel_j(k - 1, zs * std::sqrt(t));
    };
    auto phase = [](double) { return 0.0; };
    auto rate = [&](double t) { return zs / (4.0 * M_PI * std::sqrt(t)); };
    QuadResult r = quad::integrate_oscillatory(amp, phase, rate, 1.0, 2.0, opt);
    return 2.0 * M_PI * ipow(k) * Y * r.value;
}

}  // namespace

VoronoiReport voronoi_check(const CoefficientTable& t, long a, long c, double Y, cplx eta, const Profile& G_in,
                            const QuadOptions& opt) {
    const auto& d = t.descriptor();
    const int M = d.M, k = d.k;
    if (c < 1) throw PreconditionError("voronoi_check: c must be >= 1");
    if (nt::gcd(a, c) != 1) throw PreconditionError("voronoi_check: (a, c) must be 1");
    if (nt::gcd(c, M) != 1) throw PreconditionError("voronoi_check: (c, M) must be 1");
    require_table(t, 2.0 * Y, "voronoi_check");
    Profile G = G_in ? G_in : Profile([](double x) { return default_bump()(x); });

    VoronoiReport rep;
    rep.label = d.label;
    rep.a = a;
    rep.c = c;
    rep.Y = Y;
    rep.eta = eta;

    quad::detail::NeumaierSum lhs;
    for (long n = long(std::ceil(Y)); n <= long(std::floor(2.0 * Y)); ++n) {
        double g = G(double(n) / Y);
        if (g == 0.0) continue;
        lhs.add(t[n] * g * expi2pi(double(nt::mod(a * n, c)) / double(c)));
    }
    rep.lhs = lhs.value();

    // dual twist e(-conj(aM) n / c)
    long abar = (c == 1) ? 0 : nt::inv_mod(nt::mod(a * M, c), c);
    double cm = double(c) * double(c) * M;
    double start = std::pow(double(k) / (4.0 * M_PI), 2.0) / Y;  // argument past the order
    quad::detail::NeumaierSum rhs;
    double peak = 0.0;
    int quiet = 0;
    rep.truncated = false;
    for (long n = 1; n <= t.n_max(); ++n) {
        double y = double(n) / cm;
        cplx h = hankel_profile(G, Y, y, k, opt);
        double ah = std::abs(h);
        peak = std::max(peak, ah);
        rhs.add(std::conj(cplx(t[n])) * expi2pi(-double(nt::mod(abar * n, c)) / double(c)) * h);
        rep.dual_terms = n;
        if (y > start && ah < 1e-12 * peak)
            ++quiet;
        else
            quiet = 0;
        if (quiet >= 20) {
            rep.truncated = true;
            break;
        }
    }
    rep.rhs = eta / (double(c) * std::sqrt(double(M))) * rhs.value();
    double den = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
    rep.rel_diff = den == 0.0 ? 0.0 : std::abs(rep.lhs - rep.rhs) / den;
    return rep;
}

EtaCalibration calibrate_eta(const CoefficientTable& t, long c, double Y, const QuadOptions& opt) {
    if (!t.descriptor().nebentypus_trivial)
        throw PreconditionError("calibrate_eta: only trivial nebentypus is supported");
    VoronoiReport r = voronoi_check(t, 1, c, Y, 1.0, {}, opt);
    if (!r.truncated) throw NumericalError("calibrate_eta: dual sum did not reach its tail within the table");
    double den = std::max(std::abs(r.lhs), std::abs(r.rhs));
    double plus = std::abs(r.lhs - r.rhs) / den;
    double minus = std::abs(r.lhs + r.rhs) / den;
    EtaCalibration e;
    e.c = c;
    e.eta = plus <= minus ? 1.0 : -1.0;
    e.winner_residual = std::min(plus, minus);
    e.loser_residual = std::max(plus, minus);
    if (!(e.winner_residual < 1e-6) || !(e.loser_residual > 10.0 * e.winner_residual)) {
        std::ostringstream os;
        os << "calibrate_eta: ambiguous calibration for " << t.descriptor().label << " at c = " << c
           << " (residuals " << plus << " for +1, " << minus << " for -1)";
        throw NumericalError(os.str());
    }
    return e;
}

InvolutionReport voronoi_involution(const CoefficientTable& t, long a, long c, double Y, cplx eta) {
    const auto& d = t.descriptor();
    const int M = d.M, k = d.k;
    if (nt::gcd(a, c) != 1 || nt::gcd(c, M) != 1)
        throw PreconditionError("voronoi_involution: need (a, c) = (c, M) = 1");
    require_table(t, 3.0 * Y, "voronoi_involution");
    const auto& u = default_bump();
    Profile G = [&](double x) { return u(x); };
    QuadOptions inner;
    inner.tol_rel = 1e-10;

    // dual weight in s = sigma^2: Fcheck(sigma^2), cut where the bump transform is below 1e-9 of its peak
    auto fcheck = [&](double sigma) { return hankel_profile(G, Y, sigma * sigma, k, inner); };
    double sig_max = 0.5;
    double peak = 0.0;
    for (double s = 0.05; s < 1e3; s *= 1.1) {
        double v = std::abs(fcheck(s));
        peak = std::max(peak, v);
        if (v > 1e-9 * peak) sig_max = s;
        if (s > 4.0 * sig_max && s > 1.0) break;
    }
    sig_max *= 1.2;

    double rate = 2.0 * std::sqrt(2.0 * Y) + 2.0 * std::sqrt(3.0 * Y);
    QuadOptions go;
    go.wavelengths_per_panel = 2.0;
    go.coarse_cells = 8;
    auto br = quad::panel_breaks([&](double) { return rate; }, 0.0, sig_max, go);
    std::vector<double> xs, ws;
    quad::gl_nodes(br, xs, ws);
    std::vector<cplx> fv(xs.size());
    parallel_for(long(xs.size()), [&](long i) { fv[i] = fcheck(xs[i]); });

    // second transform at the integers, then the original twisted sum
    long n_hi = long(std::floor(3.0 * Y));
    std::vector<cplx> terms(n_hi + 1, 0.0);
    parallel_for(n_hi, [&](long idx) {
        long n = idx + 1;
        cplx h(0.0, 0.0);
        double sn = std::sqrt(double(n));
        for (size_t i = 0; i < xs.size(); ++i)
            h += ws[i] * 2.0 * xs[i] * fv[i] * special::bessel_j(k - 1, 4.0 * M_PI * xs[i] * sn);
        h *= 2.0 * M_PI * ipow(k);
        terms[n] = t[n] * expi2pi(double(nt::mod(a * n, c)) / double(c)) * h;
    });
    quad::detail::NeumaierSum twice, orig;
    for (long n = 1; n <= n_hi; ++n) twice.add(terms[n]);
    for (long n = long(std::ceil(Y)); n <= long(std::floor(2 * Y)); ++n)
        orig.add(t[n] * u(double(n) / Y) * expi2pi(double(nt::mod(a * n, c)) / double(c)));

    InvolutionReport rep;
    rep.original = orig.value();
    // eta of the dual form is conj(eta)
    rep.twice = eta * std::conj(eta) * twice.value();
    rep.rel_diff = std::abs(rep.twice - rep.original) / std::abs(rep.original);
    rep.nodes = long(xs.size());
    return rep;
}

// ---- sums ----

cplx s_direct(const CoefficientTable& t, const PhaseSpec& f, const WeightV& v) {
    double N = f.N();
    require_table(t, v.right() * N, "s_direct");
    quad::detail::NeumaierSum s;
    for (long n = long(std::ceil(N)); n <= long(std::floor(v.right() * N)); ++n) {
        double w = v(double(n) / N);
        if (w == 0.0) continue;
        s.add(t[n] * w * expi2pi(f.value_mod1(double(n))));
    }
    return s.value();
}

cplx s_sharp(const CoefficientTable& t, const PhaseSpec& f) {
    double N = f.N();
    require_table(t, 2.0 * N, "s_sharp");
    quad::detail::NeumaierSum s;
    for (long n = long(std::ceil(N)); n <= long(std::floor(2.0 * N)); ++n)
        s.add(t[n] * expi2pi(f.value_mod1(double(n))));
    return s.value();
}

VNatural VNatural::make(const WeightV& v, const BumpU& u, cplx eta, int M, int k) {
    cplx cu = (1.0 + I1) / u.mellin_three_quarters();
    double xi = (k % 2 == 0) ? 1.0 : -1.0;
    return VNatural(v, cu * eta * xi / std::sqrt(double(M)));
}

double VNatural::abs_integral() const {
    QuadResult r = quad::integrate_adaptive(
        [&](double x) -> cplx { return std::pow(x, 0.25) * std::fabs((*v_)(x)); }, v_->left(), v_->right());
    return std::abs(c_) * r.value.real();
}

// ---- J ----

QuadResult j_integral(double y, double r, long p, const PhaseSpec& f, const VNatural& vn, int M,
                      const QuadOptions& opt) {
    const double T = f.T(), N = f.N(), g = f.gamma();
    const double cy = 2.0 * std::sqrt(N * y / M) / double(p);
    auto amp = [&](double x) -> cplx { return vn(x); };
    auto phase = [&](double x) { return T * f.phi(x) + g * N * x + cy * std::sqrt(x) - r * N * x / double(p); };
    auto rate = [&](double x) {
        return std::fabs(T * f.phi1(x) + g * N + 0.5 * cy / std::sqrt(x) - r * N / double(p));
    };
    return quad::integrate_oscillatory(amp, phase, rate, vn.weight().left(), vn.weight().right(), opt);
}

PoissonReport poisson_r_identity_check(long n, long p, const PhaseSpec& f, const VNatural& vn, double P, int M,
                                       const QuadOptions& opt) {
    const double T = f.T(), N = f.N(), g = f.gamma();
    const double right = vn.weight().right();
    PoissonReport rep;
    rep.n = n;
    rep.p = p;
    rep.cap = 10.0 * P * T / N;
    KloostermanTable kt(p);
    long mbar = nt::inv_mod(nt::mod(M, p), p);
    long mn = nt::mod(mbar * n, p);

    quad::detail::NeumaierSum lhs;
    for (long r = long(std::ceil(N)); r <= long(std::floor(right * N)); ++r) {
        cplx w = vn(double(r) / N);
        if (w == cplx(0.0, 0.0)) continue;
        double ph = 2.0 * std::sqrt(double(n) * double(r) / M) / double(p);
        lhs.add(w * kt(mn, r) * expi2pi(f.value_mod1(double(r))) * expi2pi(ph - std::floor(ph)));
    }
    rep.lhs = lhs.value();

    // every J(n, h, p) shares the amplitude; h enters only through e(-h N v / p)
    auto [h_lo, h_hi] = window(g * double(p), 2.0 * rep.cap);
    const double cy = 2.0 * std::sqrt(N * double(n) / M) / double(p);
    double hmax = std::max(std::fabs(double(h_lo)), std::fabs(double(h_hi)));
    double rate = std::fabs(T) * 2.0 + std::fabs(g) * N + cy + hmax * N / double(p);
    QuadOptions go = opt;
    go.coarse_cells = 1;
    auto br = quad::panel_breaks([&](double) { return rate; }, 1.0, right, go);
    auto run_level = [&](const std::vector<double>& b) {
        std::vector<double> xs, ws;
        quad::gl_nodes(b, xs, ws);
        long nh = h_hi - h_lo + 1;
        std::vector<cplx> acc(nh, 0.0);
        for (size_t i = 0; i < xs.size(); ++i) {
            double v = xs[i];
            cplx a = vn(v);
            if (a == cplx(0.0, 0.0)) continue;
            double ph = T * f.phi(v) + g * N * v + cy * std::sqrt(v);
            a *= ws[i] * expi2pi(ph);
            double step = -N * v / double(p);
            cplx z = expi2pi(step - std::floor(step));
            DD start = two_prod(double(h_lo), step);
            cplx cur = a * expi2pi(start);
            for (long j = 0; j < nh; ++j) {
                acc[j] += cur;
                cur *= z;
            }
        }
        return acc;
    };
    auto coarse = run_level(br);
    auto fine = run_level(quad::refine_breaks(br));

    double jmax = 0.0, edge = 0.0;
    quad::detail::NeumaierSum r1, r2;
    for (long h = h_lo; h <= h_hi; ++h) {
        if (nt::mod(h, p) == 0) continue;
        cplx J = fine[h - h_lo];
        double dist = std::fabs(double(h) - g * double(p));
        cplx term = expi2pi(-double(nt::mod(nt::inv_mod(nt::mod(h, p), p) * mn, p)) / double(p)) * J;
        if (dist <= rep.cap + 1e-9) {
            r1.add(term);
            ++rep.r_terms;
            jmax = std::max(jmax, std::abs(J));
            if (dist >= 0.9 * rep.cap) edge = std::max(edge, std::abs(J));
        }
        r2.add(term);
    }
    double quad_err = 0.0;
    for (size_t j = 0; j < fine.size(); ++j) quad_err = std::max(quad_err, std::abs(fine[j] - coarse[j]));
    rep.rhs = N * r1.value();
    rep.rhs_double_cap = N * r2.value();
    rep.rel_diff = std::abs(rep.lhs - rep.rhs) / std::abs(rep.lhs);
    rep.cap_stability = std::abs(rep.rhs_double_cap - rep.rhs) / std::abs(rep.rhs);
    rep.edge_ratio = jmax > 0 ? edge / jmax : 0.0;
    rep.cap_ok = rep.cap_stability < 1e-7 && rep.edge_ratio < 1e-8 && quad_err < 1e-9 * std::max(jmax, 1e-300);
    return rep;
}

// ---- K ----

QuadResult k_integral(double w, double K, double x, const BumpU& u, const QuadOptions& opt) {
    double wk = w * K;
    auto amp = [&](double y) -> cplx { return u(y); };
    auto phase = [&](double y) { return 2.0 * wk * std::sqrt(y) - x * y; };
    auto rate = [&](double y) { return std::fabs(wk / std::sqrt(y) - x); };
    return quad::integrate_oscillatory(amp, phase, rate, 1.0, 2.0, opt);
}

KCheckReport k_lemma_checks(const BumpU& u, double threshold) {
    KCheckReport rep{};
    const double iu = u.integral();
    const double wmax = std::sqrt(2.0) - 0.5;

    rep.K = 100.0;
    for (double w : {-wmax, -0.5, 0.0, 0.5, wmax})
        for (double m : {2.0, 2.5, 3.0})
            for (double sg : {1.0, -1.0})
                rep.negligible_max =
                    std::max(rep.negligible_max, std::abs(k_integral(w, rep.K, sg * m * rep.K, u).value) / iu);

    const double Kw = 2000.0;
    for (double x : {200.0, 400.0, 800.0})
        for (double ratio : {0.5, 2.0})
            for (double sg : {1.0, -1.0}) {
                double w = sg * ratio * x / Kw;
                rep.window_max =
                    std::max(rep.window_max, std::abs(k_integral(w, Kw, sg * x, u).value) / iu);
            }

    // W(lambda) = e(-lambda) K(sqrt(lambda x), x) for lambda / x in (1/4, 4)
    rep.x_grid = {200.0, 400.0, 800.0, 1600.0};
    rep.w_bounds.assign(3, std::vector<double>(rep.x_grid.size(), 0.0));
    for (size_t xi = 0; xi < rep.x_grid.size(); ++xi) {
        double x = rep.x_grid[xi];
        auto W = [&](double lam) {
            return expi2pi(-lam) * k_integral(std::sqrt(lam * x), 1.0, x, u).value;
        };
        for (int s = 0; s < 24; ++s) {
            double lam = x * (0.3 + 3.2 * s / 23.0);
            double h = 1e-3 * lam;
            cplx w0 = W(lam), wp = W(lam + h), wm = W(lam - h);
            double v0 = std::abs(w0);
            double v1 = lam * std::abs(wp - wm) / (2.0 * h);
            double v2 = lam * lam * std::abs(wp - 2.0 * w0 + wm) / (h * h);
            double sx = std::sqrt(x);
            rep.w_bounds[0][xi] = std::max(rep.w_bounds[0][xi], v0 * sx);
            rep.w_bounds[1][xi] = std::max(rep.w_bounds[1][xi], v1 * sx);
            rep.w_bounds[2][xi] = std::max(rep.w_bounds[2][xi], v2 * sx);
        }
    }
    rep.uniformity = 0.0;
    for (const auto& row : rep.w_bounds) rep.uniformity = std::max(rep.uniformity, row.back() / row.front());

    cplx ref = k_integral(0.5, 100.0, 0.0, u).value;
    for (auto [w, K] : {std::pair{0.25, 200.0}, std::pair{0.125, 400.0}, std::pair{0.0625, 800.0}})
        rep.collapse_defect = std::max(rep.collapse_defect, std::abs(k_integral(w, K, 0.0, u).value - ref));

    rep.pass = rep.negligible_max <= threshold && rep.window_max <= threshold && rep.uniformity <= 4.0 &&
               rep.collapse_defect <= 1e-12 * std::abs(ref);
    return rep;
}

// ---- L ----

std::vector<double> l_mid_grid(double K, double T, int points) {
    double lo = K * K / T, hi = 0.5 * K;
    if (!(hi > lo)) throw PreconditionError("l_mid_grid: need K^2/T < K/2");
    std::vector<double> xs;
    for (int s = 0; s < points; ++s) xs.push_back(lo * std::pow(hi / lo, double(s) / std::max(1, points - 1)));
    return xs;
}

std::vector<LFamilyMember> stationary_family(const PhaseSpec& f, double K, double P, int M, int max_primes) {
    const double T = f.T(), N = f.N(), g = f.gamma();
    std::vector<long> all;
    for (long p : nt::primes_in(long(std::ceil(P)), long(std::floor(2.0 * P))))
        if (p > M) all.push_back(p);
    if (all.empty() || max_primes < 1) throw PreconditionError("stationary_family: no primes in [P, 2P] above M");
    std::vector<long> pick;
    if (long(all.size()) <= max_primes) {
        pick = all;
    } else {
        for (int i = 0; i < max_primes; ++i) {
            long p = all[size_t(std::lround(double(i) * (all.size() - 1) / std::max(1, max_primes - 1)))];
            if (pick.empty() || pick.back() != p) pick.push_back(p);
        }
    }
    // r stationary at v = y = 3/2: r N / p = gamma N + T phi'(v) + P K sqrt(y / v) / p; the pair
    // (p1, p2) is then stationary in y near x = P K (1/p1 - 1/p2)
    std::vector<LFamilyMember> fam;
    for (long p : pick) {
        long r = long(std::lround(double(p) / N * (g * N + T * f.phi1(1.5) + P * K / double(p))));
        while (nt::mod(r, p) == 0) ++r;
        fam.push_back({p, r});
    }
    long r2 = fam.front().r + 1;
    while (nt::mod(r2, fam.front().p) == 0) ++r2;
    fam.push_back({fam.front().p, r2});
    return fam;
}

LEngine::LEngine(const PhaseSpec& f, const VNatural& vn, double K, double P, int M,
                 std::vector<LFamilyMember> family, const QuadOptions& opt)
    : family_(std::move(family)), K_(K), P_(P), T_(f.T()), N_(f.N()) {
    X_ = P * P * K * K / N_;
    for (const auto& m : family_)
        if (m.p <= M) throw PreconditionError("LEngine: every prime must exceed the level M");
    const double g = f.gamma();
    const auto& u = default_bump();
    double vr = vn.weight().right();

    // shared v grid for every y and member: sampled bound on the v-derivative of the phase
    double vrate = 1.0;
    for (const auto& m : family_)
        for (int i = 0; i <= 64; ++i) {
            double v = 1.0 + (vr - 1.0) * i / 64.0;
            double base = T_ * f.phi1(v) + g * N_ - double(m.r) * N_ / double(m.p);
            for (double y : {1.0, 2.0})
                vrate = std::max(vrate, std::fabs(base + P * K * std::sqrt(y / v) / double(m.p)));
        }
    vrate *= 1.25;
    QuadOptions vo = opt;
    vo.wavelengths_per_panel = 2.0;
    vo.coarse_cells = 1;
    std::vector<double> vx, vw;
    quad::gl_nodes(quad::panel_breaks([&](double) { return vrate; }, 1.0, vr, vo), vx, vw);

    std::vector<std::vector<cplx>> B(family_.size(), std::vector<cplx>(vx.size()));
    for (size_t m = 0; m < family_.size(); ++m)
        for (size_t i = 0; i < vx.size(); ++i) {
            double v = vx[i];
            double ph = T_ * f.phi(v) + g * N_ * v - double(family_[m].r) * N_ * v / double(family_[m].p);
            B[m][i] = vw[i] * vn(v) * expi2pi(ph);
        }
    std::vector<double> sv(vx.size());
    for (size_t i = 0; i < vx.size(); ++i) sv[i] = std::sqrt(vx[i]);

    // y grid resolves J_i conj(J_j) e(-x y) for |x| up to 3K
    double yrate = 1.5 * K * P / double(family_.front().p) + 3.0 * K;
    QuadOptions yo = opt;
    yo.wavelengths_per_panel = 3.0;
    yo.coarse_cells = 1;
    auto ybr = quad::panel_breaks([&](double) { return yrate; }, 1.0, 2.0, yo);
    auto build = [&](Level& L, const std::vector<double>& br) {
        std::vector<double> w;
        quad::gl_nodes(br, L.y, w);
        L.w.resize(L.y.size());
        for (size_t i = 0; i < L.y.size(); ++i) L.w[i] = w[i] * u(L.y[i]);
        L.J.assign(family_.size(), std::vector<cplx>(L.y.size()));
        parallel_for(long(L.y.size()), [&](long i) {
            double sy = std::sqrt(L.y[i]);
            for (size_t m = 0; m < family_.size(); ++m) {
                double c = 2.0 * P * K * sy / double(family_[m].p);
                cplx s(0.0, 0.0);
                for (size_t q = 0; q < vx.size(); ++q) s += B[m][q] * expi2pi(c * sv[q]);
                L.J[m][i] = s;
            }
        });
        j_evals_ += long(L.y.size() * family_.size());
    };
    build(coarse_, ybr);
    build(fine_, quad::refine_breaks(ybr));
    scale_ = std::pow(vn.abs_integral(), 2) * u.integral();
}

QuadResult LEngine::value(double x, size_t i, size_t j) const {
    auto sum = [&](const Level& L) {
        quad::detail::NeumaierSum s;
        for (size_t q = 0; q < L.y.size(); ++q) s.add(L.w[q] * L.J[i][q] * std::conj(L.J[j][q]) * expi2pi(-x * L.y[q]));
        return s.value();
    };
    QuadResult r;
    cplx c = sum(coarse_);
    r.value = sum(fine_);
    r.err_estimate = std::abs(r.value - c);
    r.panels = long(fine_.y.size() / 16);
    r.evaluations = long(fine_.y.size() + coarse_.y.size());
    return r;
}

LCheckReport l_lemma_checks(const LEngine& e, double threshold) {
    LCheckReport rep{};
    rep.T = e.T();
    rep.K = e.K();
    rep.P = e.P();
    rep.N = e.N();
    rep.X = e.X();
    const auto& fam = e.family();
    size_t nf = fam.size();
    auto env = [&](double x) {
        double m = 0.0;
        for (size_t i = 0; i < nf; ++i)
            for (size_t j = 0; j < nf; ++j) m = std::max(m, std::abs(e.value(x, i, j).value));
        return m;
    };
    for (double x : l_mid_grid(rep.K, rep.T, 10)) {
        double v = std::max(env(x), env(-x));
        rep.x_mid.push_back(x);
        rep.envelope.push_back(v);
        rep.mid_constant = std::max(rep.mid_constant, v * rep.T * std::sqrt(x));
        rep.max_LT = std::max(rep.max_LT, v * rep.T);
    }
    for (double x : {0.25, 0.5, 1.0, 2.0, 0.75 * rep.K, rep.K})
        rep.max_LT = std::max(rep.max_LT, std::max(env(x), env(-x)) * rep.T);
    LineFit fit = fit_loglog(rep.x_mid, rep.envelope);
    rep.exponent = fit.slope;
    rep.exponent_stderr = fit.slope_stderr;
    for (double m : {2.0, 2.5, 3.0})
        rep.negligible_max = std::max(rep.negligible_max, std::max(env(m * rep.K), env(-m * rep.K)) / e.natural_scale());
    for (size_t i = 0; i < nf; ++i)
        for (size_t j = 0; j < nf; ++j) {
            double v0 = std::abs(e.value(0.0, i, j).value);
            rep.max_LT = std::max(rep.max_LT, v0 * rep.T);
            if (fam[i].p != fam[j].p) continue;
            double dr = std::fabs(double(fam[i].r - fam[j].r));
            double b = 1.0 / rep.T;
            if (dr > 0) b = std::min(b, rep.P / (rep.K * rep.N * dr));
            rep.zero_constant = std::max(rep.zero_constant, v0 / b);
        }
    rep.pass = rep.negligible_max <= threshold && std::fabs(rep.exponent + 0.5) <= 0.1;
    return rep;
}

// ---- decomposition ----

DecompositionReport s_decomposed(const CoefficientTable& t, const PhaseSpec& f, const WeightV& v, double K,
                                 double P, const BumpU& u, const DecompositionOptions& opt) {
    const auto& d = t.descriptor();
    const int M = d.M;
    const double N = f.N();
    DecompositionReport rep;
    rep.N = N;
    rep.K = K;
    rep.P = P;
    rep.X = P * P * K * K / N;
    const double X = rep.X;

    auto violate = [&](const std::string& msg) {
        if (opt.strict) throw PreconditionError("s_decomposed: " + msg);
        rep.violations.push_back(msg);
    };
    if (!(X > 4.0 * P * P / N)) violate("X = " + fmt(X) + " violates X > (2P)^2/N = " + fmt(4.0 * P * P / N));
    if (!(N < std::pow(X, 1.0 - opt.eps)))
        violate("N = " + fmt(N) + " violates N < X^(1-eps) = " + fmt(std::pow(X, 1.0 - opt.eps)));
    if (!d.eta_calibrated) violate("eta is not calibrated; using the descriptor value");
    require_table(t, 2.0 * M * X, "s_decomposed");
    require_table(t, v.right() * N, "s_decomposed");

    for (long p : nt::primes_in(long(std::ceil(P)), long(std::floor(2.0 * P))))
        if (p > M) rep.primes.push_back(p);
    if (rep.primes.empty()) throw PreconditionError("s_decomposed: no primes in [P, 2P] exceed M");
    rep.p_star = long(rep.primes.size());

    VNatural vn = VNatural::make(v, u, d.eta, M, d.k);
    rep.s_direct = s_direct(t, f, v);

    // r side shared by every prime
    std::vector<long> rs;
    std::vector<cplx> rw;
    for (long r = long(std::ceil(N)); r <= long(std::floor(v.right() * N)); ++r) {
        cplx w = vn(double(r) / N);
        if (w == cplx(0.0, 0.0)) continue;
        rs.push_back(r);
        rw.push_back(w * expi2pi(f.value_mod1(double(r))));
    }
    // n side: lambda(n) U(n / MX)
    const double MX = M * X;
    long n_lo = long(std::floor(MX)) + 1, n_hi = long(std::ceil(2.0 * MX)) - 1;
    std::vector<double> nw(std::max(0L, n_hi - n_lo + 1));
    for (long n = n_lo; n <= n_hi; ++n) nw[n - n_lo] = t[n] * u(double(n) / MX);

    // A(n) = sum over p and r, so that S(N,X,P) = sum lambda(n) U(n/MX) A(n)
    std::vector<std::vector<cplx>> Ap(rep.primes.size(), std::vector<cplx>(nw.size(), 0.0));
    std::vector<cplx> zero(rep.primes.size(), 0.0);
    const double pre = std::pow(N, 0.25) / (double(rep.p_star) * std::pow(X, 0.75));
    parallel_for(long(rep.primes.size()), [&](long ip) {
        long p = rep.primes[ip];
        KloostermanTable kt(p);
        long mbar = nt::inv_mod(nt::mod(M, p), p);
        double scale = pre / std::sqrt(double(p));
        for (size_t in = 0; in < nw.size(); ++in) {
            if (nw[in] == 0.0) continue;
            long n = n_lo + long(in);
            long mn = nt::mod(mbar * n, p);
            double cn = 2.0 * std::sqrt(double(n) / M) / double(p);
            quad::detail::NeumaierSum s;
            for (size_t ir = 0; ir < rs.size(); ++ir) {
                double ph = cn * std::sqrt(double(rs[ir]));
                s.add(rw[ir] * kt(mn, rs[ir]) * expi2pi(ph));
            }
            Ap[ip][in] = scale * s.value();
        }
        // zero frequency: n in (MX/p^2, 2MX/p^2)
        double lo = MX / (double(p) * p), hi = 2.0 * lo;
        quad::detail::NeumaierSum z;
        for (long n = long(std::floor(lo)) + 1; n < hi; ++n) {
            double un = u(double(n) / lo);
            if (un == 0.0) continue;
            double cn = 2.0 * std::sqrt(double(n) / M);
            cplx inner(0.0, 0.0);
            for (size_t ir = 0; ir < rs.size(); ++ir) inner += rw[ir] * expi2pi(cn * std::sqrt(double(rs[ir])));
            z.add(t[n] * un * inner);
        }
        zero[ip] = std::sqrt(double(p)) * std::pow(N, 0.25) / std::pow(X, 0.75) * z.value();
    });

    quad::detail::NeumaierSum total, zsum;
    double lam2 = 0.0, a2 = 0.0;
    for (size_t in = 0; in < nw.size(); ++in) {
        cplx A(0.0, 0.0);
        for (size_t ip = 0; ip < rep.primes.size(); ++ip) A += Ap[ip][in];
        total.add(nw[in] * A);
        double un = u(double(n_lo + long(in)) / MX);
        lam2 += nw[in] * nw[in] / std::max(un, 1e-300) * (un > 0 ? 1.0 : 0.0);
        a2 += std::norm(A) * un;
    }
    for (auto z : zero) zsum.add(z);
    rep.s_decomposed = total.value();
    rep.s_zero_freq = zsum.value() / double(rep.p_star);
    rep.terms = long(nw.size() * rs.size() * rep.primes.size());
    rep.residual = std::abs(rep.s_direct - rep.s_decomposed - rep.s_zero_freq);
    rep.residual_without_zero = std::abs(rep.s_direct - rep.s_decomposed);
    rep.envelope = P * std::sqrt(N / X) + std::pow(N, 1.25) * std::pow(X, 0.25) / std::pow(P, 1.5);
    rep.ratio = rep.residual / rep.envelope;
    rep.cauchy_schwarz_lhs = std::abs(rep.s_decomposed);
    rep.cauchy_schwarz_rhs = std::sqrt(lam2 * a2);
    return rep;
}

// ---- bound ledger ----

BoundLedger bound_ledger(const CoefficientTable& t, double N, double T, double gamma, double brute_force_limit) {
    BoundLedger b{};
    b.N = N;
    b.T = T;
    b.K = std::pow(T, 2.0 / 3.0);
    b.P = N / std::pow(T, 1.0 / 3.0);
    b.R = b.P * T / N;
    b.X = b.P * b.P * b.K * b.K / N;
    b.t_at_least_n = T >= N;
    std::vector<long> primes = nt::primes_in(long(std::ceil(b.P)), long(std::floor(2.0 * b.P)));
    primes.erase(std::remove_if(primes.begin(), primes.end(), [&](long p) { return p <= t.descriptor().M; }),
                 primes.end());
    b.p_star = long(primes.size());
    if (primes.empty()) throw PreconditionError("bound_ledger: no primes in [P, 2P]");
    const double pre = std::pow(N, 3) * b.X / (double(b.p_star) * b.p_star * b.P * b.P * b.K);
    const double logP = std::log(b.P);

    double diag = 0.0;
    for (long p : primes) {
        auto [lo, hi] = window(gamma * p, b.R);
        for (long r1 = lo; r1 <= hi; ++r1) {
            if (nt::mod(r1, p) == 0) continue;
            for (long r2 = r1 - ((r1 - lo) / p) * p; r2 <= hi; r2 += p) {
                if (r2 == r1) {
                    diag += 1.0 / T;
                    continue;
                }
                diag += std::min(1.0 / T, b.P / (b.K * N * std::fabs(double(r1 - r2))));
            }
        }
    }
    b.s_diag_sq = pre * diag;
    b.diag_estimate = (b.K * N + T) * logP;

    const double n_top = N / b.K, n_mid = N / T;
    auto weight = [&](long n, long p1, long p2) {
        double an = std::fabs(double(n));
        if (an >= n_mid) return std::sqrt(double(p1) * p2) / (T * std::sqrt(b.X * an));
        return 1.0 / T;
    };

    // split congruences: r1 = conj(n) p2 mod p1, r2 = -conj(n) p1 mod p2
    double off = 0.0;
    long n_max = long(std::floor(n_top));
    for (long p1 : primes)
        for (long p2 : primes) {
            if (p1 == p2) continue;
            auto [l1, h1] = window(gamma * p1, b.R);
            auto [l2, h2] = window(gamma * p2, b.R);
            for (long n = -n_max; n <= n_max; ++n) {
                if (n == 0 || nt::mod(n, p1) == 0 || nt::mod(n, p2) == 0) continue;
                long c1 = nt::mod(nt::inv_mod(nt::mod(n, p1), p1) * (p2 % p1), p1);
                long c2 = nt::mod(-nt::inv_mod(nt::mod(n, p2), p2) * (p1 % p2), p2);
                long k1 = count_class(l1, h1, c1, p1), k2 = count_class(l2, h2, c2, p2);
                if (k1 && k2) off += double(k1) * double(k2) * weight(n, p1, p2);
            }
        }
    b.s_off_sq_split = pre * off;

    double work = double(b.p_star) * b.p_star * std::pow(2.0 * b.R + 1.0, 2);
    b.s_off_sq_brute = -1.0;
    if (work <= brute_force_limit) {
        double brute = 0.0;
        for (long p1 : primes)
            for (long p2 : primes) {
                if (p1 == p2) continue;
                long q = p1 * p2;
                auto [l1, h1] = window(gamma * p1, b.R);
                auto [l2, h2] = window(gamma * p2, b.R);
                std::vector<long> t2;
                for (long r2 = l2; r2 <= h2; ++r2)
                    t2.push_back(nt::mod(r2, p2) == 0 ? -1 : nt::mod(nt::inv_mod(nt::mod(r2, p2), p2) * p1, q));
                for (long r1 = l1; r1 <= h1; ++r1) {
                    if (nt::mod(r1, p1) == 0) continue;
                    long a1 = nt::mod(nt::inv_mod(nt::mod(r1, p1), p1) * p2, q);
                    for (long v2 : t2) {
                        if (v2 < 0) continue;
                        long n0 = nt::mod(a1 - v2, q);
                        for (long n = n0 - q * ((n0 + n_max) / q); n <= n_max; n += q) {
                            if (n == 0 || n < -n_max) continue;
                            brute += weight(n, p1, p2);
                        }
                    }
                }
            }
        b.s_off_sq_brute = pre * brute;
    }
    b.off_estimate = (N * T / std::sqrt(b.K) + b.K * N) * (1.0 + N / T) * logP;
    b.off_branch_estimate = b.t_at_least_n ? N * T / std::sqrt(b.K) + b.K * N
                                           : (N * T / std::sqrt(b.K) + b.K * N) * (N / T) * logP;

    PhaseSpec f(T, gamma, N);
    b.sharp_abs = std::abs(s_sharp(t, f));
    b.theorem_bound = std::pow(T, 1.0 / 3.0) * std::sqrt(N) + N / std::pow(T, 1.0 / 6.0);
    b.sharp_ratio = b.sharp_abs / b.theorem_bound;
    return b;
}

WiltonReport wilton_check(const CoefficientTable& t, const std::vector<double>& N_grid, int gamma_points) {
    WiltonReport w;
    w.constant = 0.0;
    for (double N : N_grid) {
        double m = 0.0;
        for (int j = 0; j < gamma_points; ++j) {
            PhaseSpec f(0.0, (j + 0.5) / gamma_points, N);
            m = std::max(m, std::abs(s_sharp(t, f)) / (std::sqrt(N) * std::log(2.0 * N)));
        }
        w.N.push_back(N);
        w.max_ratio.push_back(m);
        w.constant = std::max(w.constant, m);
    }
    return w;
}

}  // namespace bdlab::pipeline
