#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

namespace rgbm {

struct MinimizeResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    int evals = 0;
    bool converged = false;
    bool boundary_hit = false;
    bool used_fallback = false;
};

// Golden-section search on [lo, hi]; assumes a bracketed minimum but degrades
// gracefully (converges to an endpoint) when the minimum sits at a boundary.
inline MinimizeResult golden_section(const std::function<double(double)>& f,
                                     double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498949;
    MinimizeResult r;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    r.evals = 2;
    while (b - a > tol && r.iterations < 300) {
        ++r.iterations;
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
        ++r.evals;
    }
    r.converged = b - a <= tol;
    if (f1 <= f2) {
        r.x = x1;
        r.fx = f1;
    } else {
        r.x = x2;
        r.fx = f2;
    }
    r.boundary_hit = r.x - lo <= tol || hi - r.x <= tol;
    return r;
}

// Nelder-Mead in one dimension: a two-point simplex with the standard
// reflection/expansion/contraction/shrink moves, candidates clamped to
// [lo, hi]. Falls back to golden-section search on the whole bracket if the
// simplex degenerates (width < 1e-6) before the tolerance is met.
inline MinimizeResult minimize_1d(const std::function<double(double)>& f,
                                  double x0, double x1, double lo, double hi,
                                  double tol, int max_iters = 200) {
    const auto clamp = [&](double x) { return std::clamp(x, lo, hi); };
    MinimizeResult r;
    double xb = clamp(x0), xw = clamp(x1);
    double fb = f(xb), fw = f(xw);
    r.evals = 2;
    if (fw < fb) {
        std::swap(xb, xw);
        std::swap(fb, fw);
    }
    while (r.iterations < max_iters) {
        const double width = std::fabs(xb - xw);
        if (width <= tol) {
            r.converged = true;
            break;
        }
        if (width < 1e-6) {
            const MinimizeResult g = golden_section(f, lo, hi, tol);
            r.x = g.x;
            r.fx = g.fx;
            r.evals += g.evals;
            r.iterations += g.iterations;
            r.converged = g.converged;
            r.boundary_hit = g.boundary_hit;
            r.used_fallback = true;
            return r;
        }
        ++r.iterations;
        const double xr = clamp(xb + (xb - xw));  // reflect through the best
        const double fr = f(xr);
        ++r.evals;
        if (fr < fb) {
            const double xe = clamp(xb + 2.0 * (xb - xw));  // expand
            const double fe = f(xe);
            ++r.evals;
            xw = xb;
            fw = fb;
            if (fe < fr) {
                xb = xe;
                fb = fe;
            } else {
                xb = xr;
                fb = fr;
            }
        } else {
            double xc, fc;
            if (fr < fw) {
                xc = clamp(xb + 0.5 * (xb - xw));  // outside contraction
            } else {
                xc = xb + 0.5 * (xw - xb);  // inside contraction
            }
            fc = f(xc);
            ++r.evals;
            if (fc < std::min(fr, fw)) {
                xw = xc;
                fw = fc;
            } else if (fr < fw && xr != xb) {
                // xr == xb happens when clamping pins the reflection on the
                // best vertex; accepting it would collapse the simplex, so
                // fall through to the shrink instead.
                xw = xr;
                fw = fr;
            } else {
                xw = xb + 0.5 * (xw - xb);  // shrink toward the best
                fw = f(xw);
                ++r.evals;
            }
            if (fw < fb) {
                std::swap(xb, xw);
                std::swap(fb, fw);
            }
        }
    }
    r.x = xb;
    r.fx = fb;
    r.boundary_hit = xb - lo <= tol || hi - xb <= tol;
    return r;
}

}  // namespace rgbm
