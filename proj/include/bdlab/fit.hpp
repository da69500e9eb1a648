#pragma once

#include <cmath>
#include <vector>

namespace bdlab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    int points = 0;
};

// least squares y = intercept + slope x
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    size_t n = x.size();
    f.points = int(n);
    if (n < 2) return f;
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (size_t i = 0; i < n; ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.slope_stderr = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    f.x_min = x.front();
    f.x_max = x.front();
    for (double v : x) {
        f.x_min = std::min(f.x_min, v);
        f.x_max = std::max(f.x_max, v);
    }
    return f;
}

// slope of log|y| against log x
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::fabs(y[i])));
    }
    LineFit f = fit_line(lx, ly);
    f.x_min = std::exp(f.x_min);
    f.x_max = std::exp(f.x_max);
    return f;
}

}  // namespace bdlab
