#include "bdlab/lfunc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bdlab/dd.hpp"
#include "bdlab/error.hpp"
#include "bdlab/fit.hpp"
#include "bdlab/parallel.hpp"
#include "bdlab/pipeline.hpp"
#include "bdlab/quad.hpp"
#include "bdlab/special.hpp"

namespace bdlab::lfunc {

namespace {

const double two_pi = 2.0 * M_PI;
const double log_2pi = std::log(two_pi);

// contour Re u = c, trapezoid in v
struct MellinNodes {
    double c = 1.0, h = 0.1;
    std::vector<double> v;
    std::vector<cplx> w;  // sum_j w_j n^{-u_j} = V(n / sqrt M)
};

double contour_half_length(double beta) {
    // e^{-beta v^2 + pi |v| / 2} < e^{-45}
    return (M_PI / 2.0 + std::sqrt(M_PI * M_PI / 4.0 + 180.0 * beta)) / (2.0 * beta);
}

// e^{beta u^2} (2 pi)^{-u} M^{u/2} gamma(s+u)/gamma(s) / u
cplx node_weight(const NewformDescriptor& d, cplx s, double beta, cplx u) {
    const double a = 0.5 * (d.k - 1);
    cplx g = special::gamma_ratio(s + u + a, s + a);
    cplx e = std::exp(beta * u * u - u * log_2pi + 0.5 * u * std::log(double(d.M)));
    return e * g / u;
}

MellinNodes make_nodes(const NewformDescriptor& d, cplx s, double beta) {
    MellinNodes m;
    double L = contour_half_length(beta);
    long J = long(std::ceil(2.0 * L / m.h));
    m.v.resize(J + 1);
    m.w.resize(J + 1);
    for (long j = 0; j <= J; ++j) {
        m.v[j] = -L + j * m.h;
        m.w[j] = m.h / two_pi * node_weight(d, s, beta, cplx(m.c, m.v[j]));
    }
    return m;
}

// smallest n0 with |V(n / sqrt M)| below tail for all n >= n0, from shifted-contour bounds
double cut_point(const NewformDescriptor& d, cplx s, double beta, double tail) {
    double L = contour_half_length(beta);
    std::vector<double> logA;
    for (int c = 1; c <= 24; ++c) {
        double A = 0.0;
        for (double v = -L; v <= L; v += 0.25) A += 0.25 / two_pi * std::abs(node_weight(d, s, beta, cplx(c, v)));
        logA.push_back(std::log(A));
    }
    // |V(n / sqrt M)| <= A(c) n^{-c}
    auto bound = [&](double logy) {
        double b = 1e300;
        for (size_t i = 0; i < logA.size(); ++i) b = std::min(b, logA[i] - double(i + 1) * logy);
        return b;
    };
    double lt = std::log(tail);
    double lo = 0.0, hi = 60.0;
    if (bound(lo) < lt) return 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (bound(mid) < lt ? hi : lo) = mid;
    }
    return std::exp(hi);
}

// sum_{n <= n_cut} lambda(n) n^{-s} V_s(n / sqrt M)
cplx mellin_side(const CoefficientTable& table, cplx s, const MellinNodes& m, long n_cut) {
    const size_t J = m.v.size();
    std::vector<cplx> part(n_cut + 1, 0.0);
    parallel_for(n_cut, [&](long idx) {
        long n = idx + 1;
        double lam = table[n];
        if (lam == 0.0) return;
        double ln = std::log(double(n));
        cplx z = std::polar(1.0, -m.v[0] * ln);
        cplx step = std::polar(1.0, -m.h * ln);
        cplx acc(0.0, 0.0);
        for (size_t j = 0; j < J; ++j) {
            acc += m.w[j] * z;
            z *= step;
        }
        double mag = lam * std::exp(-(s.real() + m.c) * ln);
        part[n] = mag * expi2pi(-s.imag() * ln / two_pi) * acc;
    });
    quad::detail::NeumaierSum sum;
    for (long n = 1; n <= n_cut; ++n) sum.add(part[n]);
    return sum.value();
}

// epsilon M^{1/2 - s} gamma(1-s) / gamma(s)
cplx dual_factor(const NewformDescriptor& d, cplx s) {
    const double a = 0.5 * (d.k - 1);
    cplx g = special::gamma_ratio(1.0 - s + a, s + a);
    cplx e = std::exp((0.5 - s) * std::log(double(d.M)) + (2.0 * s - 1.0) * log_2pi);
    return d.eps() * e * g;
}

void require_calibrated(const NewformDescriptor& d) {
    if (!d.eta_calibrated)
        throw PreconditionError("afe: eta for " + d.label + " is not calibrated; run the Voronoi calibration first");
}

void require_table(const CoefficientTable& table, long need) {
    if (table.n_max() < need) {
        std::ostringstream os;
        os << "afe: coefficient table for " << table.descriptor().label << " has n_max = " << table.n_max()
           << " but n up to " << need << " is required";
        throw PreconditionError(os.str());
    }
}

// normalised integral of exp(-1/(z(1-z))) from 0 to z
class SmoothStep {
public:
    SmoothStep() : cum_(cells_ + 1, 0.0) {
        for (int i = 0; i < cells_; ++i) cum_[i + 1] = cum_[i] + piece(double(i) / cells_, double(i + 1) / cells_);
        norm_ = cum_.back();
    }
    double operator()(double z) const {
        if (z <= 0.0) return 0.0;
        if (z >= 1.0) return 1.0;
        int i = std::min(cells_ - 1, int(z * cells_));
        return (cum_[i] + piece(double(i) / cells_, z)) / norm_;
    }

private:
    static double b(double z) { return (z <= 0.0 || z >= 1.0) ? 0.0 : std::exp(-1.0 / (z * (1.0 - z))); }
    static double piece(double a, double c) {
        const auto& g = quad::gl16();
        double m = 0.5 * (a + c), h = 0.5 * (c - a), s = 0.0;
        for (int j = 0; j < 16; ++j) s += g.w[j] * b(m + h * g.x[j]);
        return s * h;
    }
    static constexpr int cells_ = 512;
    std::vector<double> cum_;
    double norm_ = 1.0;
};

const SmoothStep& smooth_step() {
    static const SmoothStep s;
    return s;
}

long literal_cut(const NewformDescriptor& d, double t, double w) {
    return long(std::floor(std::exp(w) * std::sqrt(analytic_conductor(d, t)))) + 1;
}

}  // namespace

double analytic_conductor(const NewformDescriptor& d, double t) {
    double h = 0.5 * d.k;
    return double(d.M) / (4.0 * M_PI * M_PI) * std::abs(cplx(h, t)) * std::abs(cplx(h + 1.0, t));
}

Cutoff Cutoff::gaussian(double beta) {
    if (!(beta > 0.0)) throw PreconditionError("Cutoff: beta must be positive");
    return {Kind::gaussian, beta};
}

Cutoff Cutoff::bump(double w) {
    if (!(w > 0.0)) throw PreconditionError("Cutoff: width must be positive");
    return {Kind::bump, w};
}

std::string Cutoff::id() const {
    std::ostringstream os;
    os << (kind == Kind::gaussian ? "gaussian(beta=" : "bump(w=") << width << ")";
    return os.str();
}

double Cutoff::F(double x) const {
    if (kind != Kind::bump) throw PreconditionError("Cutoff::F: only the bump family has a closed-form F");
    if (!(x > 0.0)) return 1.0;
    double u = std::log(x);
    const auto& S = smooth_step();
    // rho(u) + rho(-u) = 1 enforced by antisymmetrisation
    return 0.5 * (S((width - u) / (2.0 * width)) + 1.0 - S((width + u) / (2.0 * width)));
}

Cutoff cutoff_f1() { return Cutoff::gaussian(1.0 / 16.0); }
Cutoff cutoff_f2() { return Cutoff::gaussian(1.0 / 9.0); }
Cutoff cutoff_literal() { return Cutoff::bump(2.0); }

long required_n_max(const NewformDescriptor& d, cplx s, const Cutoff& F) {
    if (F.kind == Cutoff::Kind::bump) return literal_cut(d, s.imag(), F.width);
    return long(std::ceil(std::max(cut_point(d, s, F.width, 1e-16), cut_point(d, 1.0 - s, F.width, 1e-16))));
}

cplx afe_value(const CoefficientTable& table, cplx s, const Cutoff& F, long* truncation_n) {
    const auto& d = table.descriptor();
    if (F.kind != Cutoff::Kind::gaussian) throw PreconditionError("afe_value: needs a gaussian cutoff");
    if (!d.nebentypus_trivial) throw PreconditionError("afe_value: only trivial nebentypus is supported");
    require_calibrated(d);
    long n1 = long(std::ceil(cut_point(d, s, F.width, 1e-16)));
    long n2 = long(std::ceil(cut_point(d, 1.0 - s, F.width, 1e-16)));
    require_table(table, std::max(n1, n2));
    if (truncation_n) *truncation_n = std::max(n1, n2);
    cplx first = mellin_side(table, s, make_nodes(d, s, F.width), n1);
    // lambda is real for trivial nebentypus, so the dual coefficients are the same
    cplx second = mellin_side(table, 1.0 - s, make_nodes(d, 1.0 - s, F.width), n2);
    return first + dual_factor(d, s) * second;
}

LValuePoint afe_lvalue(const CoefficientTable& table, double t, const Cutoff& F) {
    const auto& d = table.descriptor();
    LValuePoint p;
    p.t = t;
    p.conductor = analytic_conductor(d, t);
    p.cutoff_id = F.id();
    cplx s(0.5, t);
    if (F.kind == Cutoff::Kind::gaussian) {
        p.value = afe_value(table, s, F, &p.truncation_n);
        return p;
    }
    require_calibrated(d);
    if (!d.nebentypus_trivial) throw PreconditionError("afe_lvalue: only trivial nebentypus is supported");
    long n_cut = literal_cut(d, t, F.width);
    require_table(table, n_cut);
    p.truncation_n = n_cut;
    double sc = std::sqrt(p.conductor);
    quad::detail::NeumaierSum a, b;
    for (long n = 1; n <= n_cut; ++n) {
        double f = F.F(double(n) / sc);
        if (f == 0.0) continue;
        double ln = std::log(double(n));
        cplx ph = expi2pi(-t * ln / two_pi);
        double mag = table[n] * f / std::sqrt(double(n));
        a.add(mag * ph);
        b.add(mag * std::conj(ph));
    }
    // eps (2 pi)^{2it} M^{-it} Gamma(k/2 - it) / Gamma(k/2 + it)
    double h = 0.5 * d.k;
    double phase = (2.0 * t * log_2pi - t * std::log(double(d.M))) / two_pi;
    cplx fac = d.eps() * expi2pi(phase) * special::gamma_ratio(cplx(h, -t), cplx(h, t));
    p.value = a.value() + fac * b.value();
    return p;
}

DirichletCheck dirichlet_check(const CoefficientTable& table, double t) {
    DirichletCheck c;
    c.s = cplx(2.0, t);
    c.afe = afe_value(table, c.s, cutoff_f2());
    quad::detail::NeumaierSum sum;
    // summed from the top so the small terms accumulate first
    for (long n = table.n_max(); n >= 1; --n) {
        double ln = std::log(double(n));
        sum.add(table[n] * std::exp(-2.0 * ln) * expi2pi(-t * ln / two_pi));
    }
    c.direct = sum.value();
    c.rel_diff = std::abs(c.afe - c.direct) / std::abs(c.direct);
    return c;
}

long weyl_required_n_max(const NewformDescriptor& d, const WeylScanOptions& opt) {
    long need = 1;
    for (double t : opt.t_grid) {
        double top = t * opt.block_span;
        for (double tt : {t, top}) {
            cplx s(0.5, tt);
            need = std::max(need, required_n_max(d, s, cutoff_f1()));
            need = std::max(need, required_n_max(d, s, cutoff_f2()));
            need = std::max(need, required_n_max(d, s, cutoff_literal()));
        }
        if (opt.s_blocks) need = std::max(need, long(std::ceil(2.0 * t)));
    }
    return need;
}

WeylReport weyl_scan(const CoefficientTable& table, const WeylScanOptions& opt) {
    const auto& d = table.descriptor();
    require_calibrated(d);
    long need = weyl_required_n_max(d, opt);
    require_table(table, need);
    WeylReport rep;
    rep.label = d.label;
    const double sqM = std::sqrt(double(d.M));

    for (double t0 : opt.t_grid) {
        double block = 0.0;
        for (int i = 0; i < std::max(1, opt.block_points); ++i) {
            double t = opt.block_points <= 1 ? t0 : t0 * std::pow(opt.block_span, double(i) / (opt.block_points - 1));
            WeylRow r;
            r.t = t;
            r.conductor = analytic_conductor(d, t);
            r.envelope = 10.0 * sqM / std::pow(r.conductor, 0.25);
            LValuePoint a = afe_lvalue(table, t, cutoff_f1());
            LValuePoint b = afe_lvalue(table, t, cutoff_f2());
            r.truncation_n = std::max(a.truncation_n, b.truncation_n);
            r.abs_value = std::abs(a.value);
            r.cutoff_rel_diff = std::abs(a.value - b.value) / std::abs(a.value);
            rep.max_cutoff_rel_diff = std::max(rep.max_cutoff_rel_diff, r.cutoff_rel_diff);
            if (i == 0) {
                cplx m = afe_lvalue(table, -t, cutoff_f1()).value;
                r.conj_diff = std::abs(m - std::conj(a.value));
                rep.max_conj_diff = std::max(rep.max_conj_diff, r.conj_diff);
                r.literal_diff = std::abs(afe_lvalue(table, t, cutoff_literal()).value - a.value);
                rep.literal_within_envelope = rep.literal_within_envelope && r.literal_diff <= r.envelope;
            }
            block = std::max(block, r.abs_value);
            rep.rows.push_back(r);
        }
        rep.block_t.push_back(t0);
        rep.block_max.push_back(block);

        // dyadic pieces S(N) with phi = -log, T = t / 2 pi, N in (t^{2/3}, t)
        if (opt.s_blocks) {
            pipeline::PhaseSpec f0(t0 / two_pi, 0.0, 1.0);
            auto v = special::make_weight_v(2.0, 2.0);
            for (double N = std::exp2(std::ceil(std::log2(std::pow(t0, 2.0 / 3.0)))); N < t0; N *= 2.0) {
                pipeline::PhaseSpec f(t0 / two_pi, 0.0, N);
                SBlock sb;
                sb.t = t0;
                sb.N = N;
                sb.abs_S = std::abs(pipeline::s_direct(table, f, v));
                sb.ratio = sb.abs_S / (std::sqrt(N) * std::cbrt(t0));
                rep.s_blocks.push_back(sb);
            }
        }
    }
    LineFit fit = fit_loglog(rep.block_t, rep.block_max);
    rep.alpha = fit.slope;
    rep.alpha_stderr = fit.slope_stderr;
    rep.fit_t_min = fit.x_min;
    rep.fit_t_max = fit.x_max;
    return rep;
}

}  // namespace bdlab::lfunc
