#pragma once

#include "rgbm/inequality.hpp"

namespace rgbm {

// Stationary distribution of relative wealth y = x/<x> under positive
// reallocation: inverse-gamma with shape alpha = 1 + 2*tau/sigma^2 and scale
// beta = 2*tau/sigma^2, so the mean beta/(alpha-1) is exactly 1.
struct StationaryModel {
    double alpha = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double sigma = 0.0;
};

// tau <= 0 has no stationary distribution and raises a typed error.
StationaryModel stationary_model(double tau, double sigma);

double stationary_pdf(const StationaryModel& m, double y);
double stationary_cdf(const StationaryModel& m, double y);

// Relative-wealth level with P(Y > y) = q.
double stationary_quantile_upper(const StationaryModel& m, double q);

// Long-time share of total wealth held by the richest fraction q: the tail
// expectation E[Y 1{Y > y_q}] (the mean is 1), by adaptive quadrature on the
// density to absolute tolerance 1e-6.
double stationary_top_share(const StationaryModel& m, double q);

// The reallocation rate an equilibrium analysis infers from an observed
// share: the tau > 0 whose stationary top-q share equals target.share, by
// bisection on log tau over [1e-4, 1e2] to relative tolerance 1e-4. Shares
// outside what positive tau can produce raise an infeasible-share error.
double tau_eqm(const ShareTarget& target, double sigma);

// Reciprocal relaxation rate of the relative-wealth variance, 1/(2*tau -
// sigma^2); infinity when the variance does not converge.
double equilibration_time(double tau, double sigma);

}  // namespace rgbm
