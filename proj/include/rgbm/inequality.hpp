#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace rgbm {

// One observed data point: the richest fraction q owns `share` of the total.
struct ShareTarget {
    double q = 0.0;
    double share = 0.0;
};

// Piecewise-linear Lorenz curve, (population fraction p, wealth fraction L),
// p increasing from 0 to 1 with L(0)=0, L(1)=1. L may dip negative when
// negative wealths exist.
struct LorenzCurve {
    std::vector<std::pair<double, double>> points;
    double at(double p) const;  // linear interpolation, p in [0,1]
};

struct ShareResult {
    double share = 0.0;
    std::size_t k = 0;       // agents counted as "the richest fraction"
    bool k_clamped = false;  // q*N rounded below 1, forced to a single agent
};

// Share of total wealth held by the k = round(q*N) richest agents (k >= 1).
ShareResult top_share(std::span<const double> wealths, double q);

struct GiniResult {
    double value = 0.0;
    bool negative_wealths = false;  // values above 1 become possible
};

// Mean absolute difference over twice the mean, via the sorted identity.
// Valid for any sign pattern with nonzero total; never clamped to [0,1].
GiniResult gini(std::span<const double> wealths);

LorenzCurve lorenz(std::span<const double> wealths);

enum class Discrepancy { TopShareAbs, GiniAbs, LorenzSup, KS };

// Distance between a model wealth vector and observed share data.
//   TopShareAbs: |S_model(q) - S_data(q)|, single target.
//   GiniAbs: model Gini vs trapezoid Gini of the data Lorenz points.
//   LorenzSup: sup over the data grid of |L_model(p) - L_data(p)|.
//   KS: sup over the data grid of |F_model - F_ref| where F_ref at each grid
//       point is the mean-1 lognormal whose Lorenz curve passes through that
//       point, evaluated at its own p-quantile (see README on the reference
//       construction; a share equal to q degenerates to a point mass at the
//       mean and is handled by right-continuity).
double share_discrepancy(std::span<const double> wealths,
                         std::span<const ShareTarget> data,
                         Discrepancy measure);

}  // namespace rgbm
