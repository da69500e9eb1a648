#include "bdlab/quad.hpp"

#include <queue>

namespace bdlab::quad {

const GaussLegendre16& gl16() {
    static const GaussLegendre16 rule = [] {
        GaussLegendre16 g;
        const int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::fabs(dx) < 1e-17) break;
            }
            g.x[i] = x;
            g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return g;
    }();
    return rule;
}

std::vector<double> panel_breaks(const std::function<double(double)>& rate, double a, double b,
                                 const QuadOptions& opt) {
    std::vector<double> br;
    int cells = std::max(1, opt.coarse_cells);
    double h = (b - a) / cells;
    double wl = opt.wavelengths_per_panel;
    br.push_back(a);
    double r_left = rate(a);
    for (int c = 0; c < cells; ++c) {
        double x0 = a + c * h;
        double x1 = (c + 1 == cells) ? b : a + (c + 1) * h;
        double r_mid = rate(0.5 * (x0 + x1));
        double r_right = rate(x1);
        double m = std::max({r_left, r_mid, r_right});
        long n = std::max(1L, long(std::ceil(m * (x1 - x0) / wl)));
        for (long j = 1; j < n; ++j) br.push_back(x0 + (x1 - x0) * double(j) / double(n));
        br.push_back(x1);
        r_left = r_right;
    }
    return br;
}

void gl_nodes(const std::vector<double>& br, std::vector<double>& x, std::vector<double>& w) {
    const auto& g = gl16();
    x.clear();
    w.clear();
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        double m = 0.5 * (br[i] + br[i + 1]), h = 0.5 * (br[i + 1] - br[i]);
        for (int j = 0; j < 16; ++j) {
            x.push_back(m + h * g.x[j]);
            w.push_back(h * g.w[j]);
        }
    }
}

std::vector<double> refine_breaks(const std::vector<double>& br) {
    std::vector<double> out;
    out.reserve(br.size() * 2);
    for (size_t i = 0; i + 1 < br.size(); ++i) {
        out.push_back(br[i]);
        out.push_back(0.5 * (br[i] + br[i + 1]));
    }
    out.push_back(br.back());
    return out;
}

QuadResult integrate_oscillatory_fn(const std::function<cplx(double)>& amp,
                                    const std::function<double(double)>& phase,
                                    const std::function<double(double)>& rate, double a, double b,
                                    const QuadOptions& opt) {
    return integrate_oscillatory(amp, phase, rate, a, b, opt);
}

namespace {

constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.0};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b;
    cplx value;
    double err;
    bool operator<(const Interval& o) const { return err < o.err; }
};

Interval gk15(const std::function<cplx(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx k = wgk[7] * fc;
    cplx g = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        cplx s = f(c - h * xgk[j]) + f(c + h * xgk[j]);
        k += wgk[j] * s;
        if (j % 2 == 1) g += wg[j / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

QuadResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                              double tol_rel, double tol_abs, int max_intervals) {
    std::priority_queue<Interval> heap;
    Interval first = gk15(f, a, b);
    heap.push(first);
    cplx total = first.value;
    double err = first.err;
    long evals = 15;
    QuadResult r;
    while (err > std::max(tol_abs, tol_rel * std::abs(total))) {
        if (int(heap.size()) >= max_intervals) {
            r.converged = false;
            break;
        }
        Interval top = heap.top();
        heap.pop();
        double m = 0.5 * (top.a + top.b);
        Interval l = gk15(f, top.a, m), rr = gk15(f, m, top.b);
        evals += 30;
        total += l.value + rr.value - top.value;
        err += l.err + rr.err - top.err;
        heap.push(l);
        heap.push(rr);
    }
    // re-sum in a fixed order to avoid drift from the incremental updates
    std::vector<Interval> all;
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });
    cplx s = 0.0;
    double e = 0.0;
    for (const auto& iv : all) {
        s += iv.value;
        e += iv.err;
    }
    r.value = s;
    r.err_estimate = e;
    r.panels = long(all.size());
    r.evaluations = evals;
    return r;
}

}  // namespace bdlab::quad
