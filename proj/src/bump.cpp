#include <cmath>
#include <sstream>

#include "bdlab/error.hpp"
#include "bdlab/quad.hpp"
#include "bdlab/special.hpp"

namespace bdlab::special {

namespace {

double bump01(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

// cumulative integrals of bump01 on a uniform grid
struct RampTable {
    static constexpr int cells = 512;
    std::vector<double> cum;
    double total = 0.0;
    RampTable() {
        const auto& g = quad::gl16();
        cum.assign(cells + 1, 0.0);
        double h = 1.0 / cells;
        for (int i = 0; i < cells; ++i) {
            double s = 0.0;
            for (int j = 0; j < 16; ++j) s += g.w[j] * bump01((i + 0.5) * h + 0.5 * h * g.x[j]);
            cum[i + 1] = cum[i] + 0.5 * h * s;
        }
        total = cum[cells];
    }
};

const RampTable& ramp_table() {
    static const RampTable t;
    return t;
}

const std::vector<cplx> default_mellin_points = {0.25, 0.5, 0.75, 1.0};

}  // namespace

BumpU::BumpU() : BumpU(default_mellin_points) {}

BumpU::BumpU(const std::vector<cplx>& mellin_points) {
    for (cplx s : mellin_points) cache_.emplace_back(s, mellin_u(*this, s));
}

double BumpU::operator()(double x) const {
    if (x <= 1.0 || x >= 2.0) return 0.0;
    return std::exp(-1.0 / ((x - 1.0) * (2.0 - x)));
}

double BumpU::d1(double x) const {
    if (x <= 1.0 || x >= 2.0) return 0.0;
    double g = (x - 1.0) * (2.0 - x);
    double gp = 3.0 - 2.0 * x;
    return (*this)(x) * gp / (g * g);
}

double BumpU::d2(double x) const {
    if (x <= 1.0 || x >= 2.0) return 0.0;
    double g = (x - 1.0) * (2.0 - x);
    double gp = 3.0 - 2.0 * x;
    double q = gp / (g * g);
    return (*this)(x) * (q * q - 2.0 / (g * g) - 2.0 * gp * gp / (g * g * g));
}

cplx BumpU::mellin(cplx s) const {
    for (const auto& [key, val] : cache_)
        if (key == s) return val;
    return mellin_u(*this, s);
}

BumpU make_bump_u() { return BumpU(); }

cplx mellin_u(const BumpU& u, cplx s) {
    auto f = [&](double x) -> cplx { return u(x) * std::pow(cplx(x, 0.0), s - 1.0); };
    quad::QuadResult r = quad::integrate_adaptive(f, 1.0, 2.0, 1e-13, 1e-300, 4000);
    if (!r.converged || r.err_estimate > 1e-10 * std::abs(r.value)) {
        std::ostringstream os;
        os << "mellin_u: no convergence at s = " << s << " after " << r.panels
           << " intervals, error estimate " << r.err_estimate;
        throw NumericalError(os.str());
    }
    return r.value;
}

cplx mellin_u_panels(const BumpU& u, cplx s, int panels) {
    const auto& g = quad::gl16();
    double h = 1.0 / panels;
    cplx sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        double mid = 1.0 + (i + 0.5) * h;
        for (int j = 0; j < 16; ++j) {
            double x = mid + 0.5 * h * g.x[j];
            sum += g.w[j] * u(x) * std::pow(cplx(x, 0.0), s - 1.0);
        }
    }
    return 0.5 * h * sum;
}

WeightV::WeightV(double delta, double support_right) : delta_(delta), right_(support_right) {
    if (!(delta >= 2.0)) throw PreconditionError("make_weight_v: delta must be >= 2");
    if (!(support_right > 1.0 && support_right <= 2.0))
        throw PreconditionError("make_weight_v: support_right must lie in (1, 2]");
    if (support_right - 1.0 < 2.0 / delta - 1e-12) {
        std::ostringstream os;
        os << "make_weight_v: support width " << support_right - 1.0 << " is narrower than 2/delta = "
           << 2.0 / delta;
        throw PreconditionError(os.str());
    }
}

double WeightV::ramp(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const RampTable& tab = ramp_table();
    double pos = t * RampTable::cells;
    int i = std::min(int(pos), RampTable::cells - 1);
    double t0 = double(i) / RampTable::cells;
    double h = t - t0;
    const auto& g = quad::gl16();
    double s = 0.0;
    for (int j = 0; j < 16; ++j) s += g.w[j] * bump01(t0 + 0.5 * h + 0.5 * h * g.x[j]);
    return (tab.cum[i] + 0.5 * h * s) / tab.total;
}

double WeightV::operator()(double x) const {
    if (x <= 1.0 || x >= right_) return 0.0;
    double up = delta_ * (x - 1.0);
    double down = delta_ * (right_ - x);
    if (up < 1.0) return ramp(up);
    if (down < 1.0) return ramp(down);
    return 1.0;
}

double WeightV::d1(double x) const {
    if (x <= 1.0 || x >= right_) return 0.0;
    double up = delta_ * (x - 1.0);
    double down = delta_ * (right_ - x);
    double z = ramp_table().total;
    if (up < 1.0) return delta_ * bump01(up) / z;
    if (down < 1.0) return -delta_ * bump01(down) / z;
    return 0.0;
}

double WeightV::d2(double x) const {
    if (x <= 1.0 || x >= right_) return 0.0;
    double up = delta_ * (x - 1.0);
    double down = delta_ * (right_ - x);
    double z = ramp_table().total;
    auto bump_d = [](double t) {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        double g = t * (1.0 - t);
        return bump01(t) * (1.0 - 2.0 * t) / (g * g);
    };
    if (up < 1.0) return delta_ * delta_ * bump_d(up) / z;
    if (down < 1.0) return delta_ * delta_ * bump_d(down) / z;
    return 0.0;
}

WeightV make_weight_v(double delta, double support_right) { return WeightV(delta, support_right); }

}  // namespace bdlab::special
