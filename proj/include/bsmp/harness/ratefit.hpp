#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bsmp::harness {

/// Log-log least-squares fit of an error sequence against a resolution
/// sequence. `slope` is the decay order: ys ~ C * xs^(-slope), so a sequence
/// halving like 1/N reports slope 1.0.
struct RateFit {
    std::vector<double> xs;
    std::vector<double> ys;
    double slope = 0.0;
    double intercept = 0.0;  // fitted log y at log x = 0
    double r2 = 0.0;
};

inline RateFit fit_rate(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (xs.size() < 2) throw std::invalid_argument("fit_rate: need at least two points");
    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_rate: inputs must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: xs values must be distinct");
    const double ls_slope = sxy / sxx;
    RateFit fit;
    fit.xs = std::move(xs);
    fit.ys = std::move(ys);
    fit.slope = -ls_slope;
    fit.intercept = my - ls_slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;  // constant ys are fit exactly by the constant model
    } else {
        const double ss_res = syy - ls_slope * sxy;
        fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

}  // namespace bsmp::harness
