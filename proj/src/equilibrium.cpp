#include "rgbm/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rgbm/errors.hpp"
#include "rgbm/numeric.hpp"

namespace rgbm {

StationaryModel stationary_model(double tau, double sigma) {
    if (!(sigma > 0.0))
        throw Error(errc::invalid_state, "stationary_model requires sigma > 0");
    if (!(tau > 0.0))
        throw Error(errc::no_stationary_distribution,
                    "no stationary wealth distribution exists for tau <= 0");
    const double b = 2.0 * tau / (sigma * sigma);
    return {1.0 + b, b, tau, sigma};
}

double stationary_pdf(const StationaryModel& m, double y) {
    if (y <= 0.0) return 0.0;
    const double lg =
        m.alpha * std::log(m.beta) - std::lgamma(m.alpha) -
        (m.alpha + 1.0) * std::log(y) - m.beta / y;
    return std::exp(lg);
}

double stationary_cdf(const StationaryModel& m, double y) {
    if (y <= 0.0) return 0.0;
    return gamma_q(m.alpha, m.beta / y);
}

double stationary_quantile_upper(const StationaryModel& m, double q) {
    if (!(q > 0.0 && q < 1.0))
        throw Error(errc::invalid_state, "quantile requires 0 < q < 1");
    // Solve gamma_p(alpha, u) = q in u = beta/y; gamma_p is increasing in u.
    double lo = 0.0;
    double hi = m.alpha + 10.0 * std::sqrt(m.alpha) + 10.0;
    while (gamma_p(m.alpha, hi) < q) {
        hi *= 2.0;
        if (hi > 1e300)
            throw Error(errc::numeric, "quantile bracket expansion failed");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_p(m.alpha, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return m.beta / (0.5 * (lo + hi));
}

double stationary_top_share(const StationaryModel& m, double q) {
    const double yq = stationary_quantile_upper(m, q);
    const double uq = m.beta / yq;
    // In u = beta/y the tail expectation becomes
    //   share = (beta/Gamma(alpha)) * I,  I = int_0^{uq} u^(alpha-2) e^(-u) du.
    // The integrand spans thousands of orders of magnitude at large alpha, so
    // integrate exp(phi(u) - phi_max) with phi = (alpha-2) ln u - u and put
    // the scale back through logs. For alpha < 2 the u->0 singularity is
    // removed by t = u^(alpha-1), whose integrand is bounded by 1.
    const double a = m.alpha;
    double share;
    QuadratureResult quad;
    if (a >= 2.0) {
        const double upeak = a - 2.0;
        const double umax = std::min(upeak, uq);
        const double phi_max =
            umax > 0.0 ? (a - 2.0) * std::log(umax) - umax : 0.0;
        const auto g = [&](double u) {
            if (u <= 0.0) return a == 2.0 ? std::exp(-phi_max) : 0.0;
            return std::exp((a - 2.0) * std::log(u) - u - phi_max);
        };
        const double log_scale = phi_max - std::lgamma(a - 1.0);
        const double scale = std::exp(log_scale);
        if (!std::isfinite(scale))
            throw Error(errc::numeric, "stationary share scale overflow");
        const double tol = scale > 0.0 ? 1e-7 / scale : 1e-7;
        quad = integrate_adaptive(g, 0.0, uq, tol);
        share = scale * quad.value;
    } else {
        const double p = a - 1.0;  // in (0,1)
        const double tq = std::pow(uq, p);
        const auto g = [&](double t) {
            return t <= 0.0 ? 1.0 : std::exp(-std::pow(t, 1.0 / p));
        };
        const double scale = m.beta / (p * std::tgamma(a));
        const double tol = 1e-7 / scale;
        quad = integrate_adaptive(g, 0.0, tq, tol);
        share = scale * quad.value;
    }
    if (!quad.converged)
        throw Error(errc::numeric,
                    "stationary share quadrature did not converge: error=" +
                        std::to_string(quad.error_estimate) + " after " +
                        std::to_string(quad.subdivisions) + " panels");
    return share;
}

double tau_eqm(const ShareTarget& target, double sigma) {
    if (!(sigma > 0.0))
        throw Error(errc::invalid_state, "tau_eqm requires sigma > 0");
    if (!(target.q > 0.0 && target.q < 1.0))
        throw Error(errc::invalid_state, "tau_eqm requires 0 < q < 1");
    if (!(target.share > target.q) || !(target.share < 1.0))
        throw Error(errc::infeasible_share,
                    "equilibrium share must lie strictly between q and 1");
    constexpr double tau_lo = 1e-4, tau_hi = 1e2;
    const auto share_at = [&](double tau) {
        return stationary_top_share(stationary_model(tau, sigma), target.q);
    };
    const double s_hi = share_at(tau_lo);  // share is decreasing in tau
    const double s_lo = share_at(tau_hi);
    if (target.share > s_hi || target.share < s_lo)
        throw Error(errc::infeasible_share,
                    "share " + std::to_string(target.share) +
                        " outside the achievable equilibrium range [" +
                        std::to_string(s_lo) + ", " + std::to_string(s_hi) +
                        "] for q=" + std::to_string(target.q));
    double llo = std::log(tau_lo), lhi = std::log(tau_hi);
    while (lhi - llo > 1e-4) {
        const double mid = 0.5 * (llo + lhi);
        if (share_at(std::exp(mid)) > target.share)
            llo = mid;  // share too high -> need more reallocation
        else
            lhi = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

double equilibration_time(double tau, double sigma) {
    if (!(sigma > 0.0))
        throw Error(errc::invalid_state, "equilibration_time requires sigma > 0");
    const double rate = 2.0 * tau - sigma * sigma;
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / rate;
}

}  // namespace rgbm
