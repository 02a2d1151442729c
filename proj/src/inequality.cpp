#include "rgbm/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rgbm/errors.hpp"
#include "rgbm/numeric.hpp"

namespace rgbm {

namespace {

double checked_total(std::span<const double> w) {
    const double total = pairwise_sum(w);
    if (total == 0.0)
        throw Error(errc::degenerate_total, "total wealth is zero");
    return total;
}

void check_targets(std::span<const ShareTarget> data) {
    if (data.empty())
        throw Error(errc::usage, "share_discrepancy: no data targets");
    for (const auto& t : data) {
        if (!(t.q > 0.0 && t.q < 1.0) || !std::isfinite(t.share))
            throw Error(errc::data, "share target requires 0 < q < 1 and finite share");
    }
}

// Data Lorenz points implied by the targets: richest q own S, so the poorest
// 1-q own 1-S. Sorted by p with endpoints attached.
LorenzCurve data_lorenz(std::span<const ShareTarget> data) {
    LorenzCurve c;
    c.points.reserve(data.size() + 2);
    c.points.emplace_back(0.0, 0.0);
    for (const auto& t : data) c.points.emplace_back(1.0 - t.q, 1.0 - t.share);
    c.points.emplace_back(1.0, 1.0);
    std::sort(c.points.begin() + 1, c.points.end() - 1);
    for (std::size_t j = 1; j < c.points.size(); ++j)
        if (!(c.points[j].first > c.points[j - 1].first))
            throw Error(errc::data, "share targets must have distinct q in (0,1)");
    return c;
}

double trapezoid_gini(const LorenzCurve& c) {
    double area2 = 0.0;  // 2 * integral of L dp
    for (std::size_t j = 1; j < c.points.size(); ++j) {
        const auto& [p0, l0] = c.points[j - 1];
        const auto& [p1, l1] = c.points[j];
        area2 += (p1 - p0) * (l0 + l1);
    }
    return 1.0 - area2;
}

}  // namespace

double LorenzCurve::at(double p) const {
    if (points.size() < 2 || !(p >= 0.0 && p <= 1.0))
        throw Error(errc::invalid_state, "lorenz interpolation needs p in [0,1]");
    const auto it = std::lower_bound(
        points.begin(), points.end(), p,
        [](const std::pair<double, double>& pt, double v) { return pt.first < v; });
    if (it == points.begin()) return it->second;
    if (it == points.end()) return points.back().second;
    const auto& [p1, l1] = *it;
    const auto& [p0, l0] = *(it - 1);
    if (p1 == p0) return l1;
    return l0 + (l1 - l0) * (p - p0) / (p1 - p0);
}

ShareResult top_share(std::span<const double> wealths, double q) {
    const std::size_t n = wealths.size();
    if (n < 1) throw Error(errc::invalid_state, "top_share of empty vector");
    if (!(q > 0.0 && q < 1.0))
        throw Error(errc::invalid_state, "top_share requires 0 < q < 1");
    const double total = checked_total(wealths);
    ShareResult r;
    const long long rounded = std::llround(q * static_cast<double>(n));
    r.k_clamped = rounded < 1;
    r.k = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1ll, rounded)));
    std::vector<double> scratch(wealths.begin(), wealths.end());
    std::nth_element(scratch.begin(), scratch.begin() + (r.k - 1), scratch.end(),
                     std::greater<>());
    r.share = pairwise_sum(std::span<const double>(scratch.data(), r.k)) / total;
    return r;
}

GiniResult gini(std::span<const double> wealths) {
    const std::size_t n = wealths.size();
    if (n < 2) throw Error(errc::insufficient_data, "gini needs at least 2 values");
    const double total = checked_total(wealths);
    std::vector<double> s(wealths.begin(), wealths.end());
    std::sort(s.begin(), s.end());
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * s[i];
    GiniResult r;
    r.value = weighted / (static_cast<double>(n) * total);
    r.negative_wealths = s.front() < 0.0;
    return r;
}

LorenzCurve lorenz(std::span<const double> wealths) {
    const std::size_t n = wealths.size();
    if (n < 1) throw Error(errc::invalid_state, "lorenz of empty vector");
    const double total = checked_total(wealths);
    std::vector<double> s(wealths.begin(), wealths.end());
    std::sort(s.begin(), s.end());
    LorenzCurve c;
    c.points.reserve(n + 1);
    c.points.emplace_back(0.0, 0.0);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += s[i];
        c.points.emplace_back(static_cast<double>(i + 1) / static_cast<double>(n),
                              cum / total);
    }
    c.points.back() = {1.0, 1.0};
    return c;
}

double share_discrepancy(std::span<const double> wealths,
                         std::span<const ShareTarget> data,
                         Discrepancy measure) {
    check_targets(data);
    switch (measure) {
        case Discrepancy::TopShareAbs: {
            if (data.size() != 1)
                throw Error(errc::usage,
                            "TopShareAbs takes exactly one share target");
            return std::fabs(top_share(wealths, data[0].q).share - data[0].share);
        }
        case Discrepancy::GiniAbs: {
            const double gd = trapezoid_gini(data_lorenz(data));
            return std::fabs(gini(wealths).value - gd);
        }
        case Discrepancy::LorenzSup: {
            const LorenzCurve dc = data_lorenz(data);
            const LorenzCurve mc = lorenz(wealths);
            double sup = 0.0;
            for (std::size_t j = 1; j + 1 < dc.points.size(); ++j) {
                const auto& [p, l] = dc.points[j];
                sup = std::max(sup, std::fabs(mc.at(p) - l));
            }
            return sup;
        }
        case Discrepancy::KS: {
            // Reference CDF at each grid point: the mean-1 lognormal whose
            // Lorenz curve passes through (p, L) has shape
            // s = ppf(p) - ppf(L); the point's wealth threshold is that
            // distribution's p-quantile x = exp(s ppf(p) - s^2/2). A
            // continuous reference evaluates to p there; s = 0 collapses to a
            // point mass at 1 whose right-continuous CDF is 1.
            const double mean = checked_total(wealths) / static_cast<double>(wealths.size());
            double sup = 0.0;
            for (const auto& t : data) {
                if (t.share < t.q || t.share >= 1.0)
                    throw Error(errc::data,
                                "KS reference needs q <= share < 1 per target");
                const double p = 1.0 - t.q;
                const double l = 1.0 - t.share;
                const double s = norm_ppf(p) - norm_ppf(l);
                double x, f_ref;
                if (s == 0.0) {
                    x = 1.0;
                    f_ref = 1.0;
                } else {
                    x = std::exp(s * norm_ppf(p) - 0.5 * s * s);
                    f_ref = p;
                }
                std::size_t below = 0;
                for (double w : wealths)
                    if (w / mean <= x) ++below;
                const double f_model =
                    static_cast<double>(below) / static_cast<double>(wealths.size());
                sup = std::max(sup, std::fabs(f_model - f_ref));
            }
            return sup;
        }
    }
    throw Error(errc::usage, "unknown discrepancy measure");
}

}  // namespace rgbm
