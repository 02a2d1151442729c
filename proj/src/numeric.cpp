#include "rgbm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rgbm/errors.hpp"

namespace rgbm {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// AS241 PPND16 coefficients (Wichura 1988).
constexpr double kA[8] = {
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3};
constexpr double kB[8] = {
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3};
constexpr double kC[8] = {
    1.42343711074968357734e0, 4.63033784615654529590e0,
    5.76949722146069140550e0, 3.64784832476320460504e0,
    1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[8] = {
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1,
    1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9};
constexpr double kE[8] = {
    6.65790464350110377720e0, 5.46378491116411436990e0,
    1.78482653991729133580e0, 2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[8] = {
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4,
    1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15};

double rational7(const double (&num)[8], const double (&den)[8], double r) {
    double p = num[7];
    for (int i = 6; i >= 0; --i) p = p * r + num[i];
    double q = den[7];
    for (int i = 6; i >= 0; --i) q = q * r + den[i];
    return p / q;
}

}  // namespace

double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(errc::numeric, "norm_ppf: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * rational7(kA, kB, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        x = rational7(kC, kD, r - 1.6);
    } else {
        x = rational7(kE, kF, r - 5.0);
    }
    return q < 0.0 ? -x : x;
}

namespace {

// Series expansion for P(a,x), x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 10000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw Error(errc::numeric, "incomplete gamma series failed to converge");
}

// Lentz continued fraction for Q(a,x), x >= a+1.
double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw Error(errc::numeric, "incomplete gamma continued fraction failed to converge");
}

}  // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw Error(errc::numeric, "gamma_p: require a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0)
        throw Error(errc::numeric, "gamma_q: require a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct PanelResult {
    double kronrod;
    double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        resk += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) resg += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    resk *= h;
    resg *= h;
    const double diff = std::fabs(resk - resg);
    // QUADPACK-style sharpened estimate, floored by the raw difference scale.
    const double err = diff > 0.0 ? std::min(diff, std::pow(200.0 * diff, 1.5)) : 0.0;
    return {resk, err};
}

void integrate_rec(const std::function<double(double)>& f, double a, double b,
                   double tol, int depth, int max_depth, double& total,
                   double& total_err, int& panels, bool& ok) {
    const PanelResult r = gk15(f, a, b);
    ++panels;
    if (r.error <= tol || depth >= max_depth) {
        total += r.kronrod;
        total_err += r.error;
        if (r.error > tol) ok = false;
        return;
    }
    const double c = 0.5 * (a + b);
    integrate_rec(f, a, c, tol * 0.5, depth + 1, max_depth, total, total_err, panels, ok);
    integrate_rec(f, c, b, tol * 0.5, depth + 1, max_depth, total, total_err, panels, ok);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_depth) {
    if (a == b) return {0.0, 0.0, 0, true};
    double total = 0.0, total_err = 0.0;
    int panels = 0;
    bool ok = true;
    integrate_rec(f, a, b, abs_tol, 0, max_depth, total, total_err, panels, ok);
    return {total, total_err, panels, ok && total_err <= abs_tol * 4.0};
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw Error(errc::insufficient_data, "ols_fit: need >= 3 matching points");
    const double xm = pairwise_mean(x);
    const double ym = pairwise_mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - xm;
        sxx += dx * dx;
        sxy += dx * (y[i] - ym);
    }
    if (sxx == 0.0)
        throw Error(errc::data, "ols_fit: degenerate abscissa (all x equal)");
    const double slope = sxy / sxx;
    const double intercept = ym - slope * xm;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ssr += r * r;
    }
    const double sigma2 = ssr / static_cast<double>(n - 2);
    return {slope, intercept, std::sqrt(sigma2 / sxx)};
}

}  // namespace rgbm
