#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rgbm {

// Fixed-shape tree summation. The reduction tree depends only on n, so the
// result is identical no matter how work is scheduled, and rounding error
// grows like O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values);

inline double pairwise_mean(std::span<const double> values) {
    return pairwise_sum(values) / static_cast<double>(values.size());
}

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal quantile (Wichura's AS241, ~1e-15 relative accuracy).
// Requires 0 < p < 1.
double norm_ppf(double p);

// Regularized incomplete gamma functions, P(a,x) + Q(a,x) = 1, a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

struct QuadratureResult {
    double value;
    double error_estimate;
    int subdivisions;
    bool converged;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b] to absolute tolerance abs_tol.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_depth = 60);

struct LinearFit {
    double slope;
    double intercept;
    double slope_stderr;
};

// Ordinary least squares y = intercept + slope * x; n >= 3 for a stderr.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

}  // namespace rgbm
