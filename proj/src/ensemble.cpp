#include "rgbm/ensemble.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "rgbm/errors.hpp"
#include "rgbm/numeric.hpp"
#include "rgbm/philox.hpp"

namespace rgbm {

namespace {

constexpr std::size_t kNoiseCacheBytes = 256ull << 20;

void check_params(const ModelParams& p) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.tau) || !(p.sigma >= 0.0))
        throw Error(errc::invalid_state,
                    "model params: need finite mu/tau and sigma >= 0");
}

void check_stability(const ModelParams& p, const StepConfig& cfg) {
    if (p.tau != 0.0 && !(cfg.dt < 1.0 / std::fabs(p.tau)))
        throw Error(errc::invalid_state,
                    "step size dt=" + std::to_string(cfg.dt) +
                        " violates stability bound dt < 1/|tau| for tau=" +
                        std::to_string(p.tau));
}

// Core substep shared by live stepping and frozen-noise replay, so both
// produce identical bits. `noise`, when non-null, holds one variate per agent;
// otherwise variates come straight from the counter-based stream.
void apply_substep(std::vector<double>& w, const ModelParams& p,
                   const StepConfig& cfg, const double* noise,
                   std::uint64_t seed, std::uint64_t tick) {
    const double m = pairwise_mean(w);
    const double mu_dt = p.mu * cfg.dt;
    const double sig_sqdt = p.sigma * std::sqrt(cfg.dt);
    const double tau_dt = p.tau * cfg.dt;
    const bool need_noise = sig_sqdt != 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double xi = 0.0;
        if (need_noise)
            xi = noise ? noise[i] : NoiseStream::normal(seed, 0, i, tick);
        const double x = w[i];
        const double y = x + x * (mu_dt + sig_sqdt * xi) - tau_dt * (x - m);
        if (!std::isfinite(y))
            throw Error(errc::numerical_overflow,
                        "non-finite wealth for agent " + std::to_string(i) +
                            " at substep " + std::to_string(tick));
        w[i] = y;
    }
}

}  // namespace

StepConfig step_config(int substeps_per_year) {
    if (substeps_per_year < 1)
        throw Error(errc::invalid_state, "substeps_per_year must be >= 1");
    return {1.0 / substeps_per_year, substeps_per_year};
}

Ensemble make_ensemble(std::vector<double> wealths, double start_time,
                       std::uint64_t seed) {
    if (wealths.size() < 2)
        throw Error(errc::invalid_state, "ensemble needs at least 2 agents");
    for (double w : wealths)
        if (!std::isfinite(w))
            throw Error(errc::invalid_state, "ensemble wealths must be finite");
    if (!std::isfinite(start_time))
        throw Error(errc::invalid_state, "ensemble start time must be finite");
    Ensemble e;
    e.wealths = std::move(wealths);
    e.time = start_time;
    e.seed = seed;
    return e;
}

double sample_mean(const Ensemble& e) {
    if (e.wealths.empty())
        throw Error(errc::invalid_state, "sample_mean of empty ensemble");
    return pairwise_mean(e.wealths);
}

void step(Ensemble& e, const ModelParams& p, const StepConfig& cfg) {
    check_params(p);
    check_stability(p, cfg);
    if (e.wealths.empty())
        throw Error(errc::invalid_state, "step on empty ensemble");
    apply_substep(e.wealths, p, cfg, nullptr, e.seed, e.tick);
    e.time += cfg.dt;
    ++e.tick;
}

void simulate_years(Ensemble& e, const ParamSchedule& schedule, int n_years,
                    const StepConfig& cfg, const Observer& observer) {
    if (n_years < 0)
        throw Error(errc::invalid_state, "n_years must be >= 0");
    // Each Philox block yields two normals, so variates for an even tick and
    // the following odd one are generated together and the second is stashed.
    // Bits match the single-draw path exactly; this just halves the RNG work.
    const std::size_t n = e.wealths.size();
    std::vector<double> now(n), stash(n);
    constexpr std::uint64_t kNoStash = ~std::uint64_t{0};
    std::uint64_t stash_tick = kNoStash;
    for (int k = 0; k < n_years; ++k) {
        const double year_start = e.time;
        const int year = static_cast<int>(std::llround(year_start));
        const ModelParams p = schedule(year);
        check_params(p);
        check_stability(p, cfg);
        for (int s = 0; s < cfg.substeps_per_year; ++s) {
            const double* noise = nullptr;
            if (p.sigma != 0.0) {
                if (stash_tick == e.tick) {
                    now.swap(stash);
                    stash_tick = kNoStash;
                } else if ((e.tick & 1) == 0) {
                    double pr[2];
                    for (std::size_t i = 0; i < n; ++i) {
                        NoiseStream::normal_pair(e.seed, 0, i, e.tick, pr);
                        now[i] = pr[0];
                        stash[i] = pr[1];
                    }
                    stash_tick = e.tick + 1;
                } else {
                    for (std::size_t i = 0; i < n; ++i)
                        now[i] = NoiseStream::normal(e.seed, 0, i, e.tick);
                }
                noise = now.data();
            }
            apply_substep(e.wealths, p, cfg, noise, e.seed, e.tick);
            ++e.tick;
        }
        e.time = year_start + 1.0;  // re-anchor: no dt accumulation drift
        if (observer) observer(e);
    }
}

NoiseBlock::NoiseBlock(std::uint64_t seed, std::uint64_t base_tick,
                       std::size_t n_agents, int substeps)
    : seed_(seed), base_tick_(base_tick), n_(n_agents), substeps_(substeps) {
    if (n_ == 0 || substeps_ < 1)
        throw Error(errc::invalid_state, "noise block needs agents and substeps");
    const std::size_t bytes = n_ * static_cast<std::size_t>(substeps_) * 8;
    if (bytes > kNoiseCacheBytes) return;  // row() regenerates on demand
    cache_.resize(n_ * static_cast<std::size_t>(substeps_));
    int s = 0;
    while (s < substeps_) {
        const std::uint64_t t = base_tick_ + static_cast<std::uint64_t>(s);
        if ((t & 1) == 0 && s + 1 < substeps_) {
            // Even-aligned: one Philox block feeds two consecutive substeps.
            double pr[2];
            for (std::size_t i = 0; i < n_; ++i) {
                NoiseStream::normal_pair(seed_, 0, i, t, pr);
                cache_[static_cast<std::size_t>(s) * n_ + i] = pr[0];
                cache_[static_cast<std::size_t>(s + 1) * n_ + i] = pr[1];
            }
            s += 2;
        } else {
            for (std::size_t i = 0; i < n_; ++i)
                cache_[static_cast<std::size_t>(s) * n_ + i] =
                    NoiseStream::normal(seed_, 0, i, t);
            ++s;
        }
    }
}

const double* NoiseBlock::row(int s, std::vector<double>& scratch) const {
    if (s < 0 || s >= substeps_)
        throw Error(errc::invalid_state, "noise block row out of range");
    if (!cache_.empty()) return cache_.data() + static_cast<std::size_t>(s) * n_;
    scratch.resize(n_);
    const std::uint64_t t = base_tick_ + static_cast<std::uint64_t>(s);
    for (std::size_t i = 0; i < n_; ++i)
        scratch[i] = NoiseStream::normal(seed_, 0, i, t);
    return scratch.data();
}

NoiseBlock fork_noise(const Ensemble& e, const StepConfig& cfg) {
    return NoiseBlock(e.seed, e.tick, e.wealths.size(), cfg.substeps_per_year);
}

Ensemble propagate_year(const Ensemble& e, const NoiseBlock& noise,
                        const ModelParams& p, const StepConfig& cfg) {
    check_params(p);
    check_stability(p, cfg);
    if (noise.seed() != e.seed || noise.base_tick() != e.tick ||
        noise.n_agents() != e.wealths.size() ||
        noise.substeps() != cfg.substeps_per_year)
        throw Error(errc::invalid_state,
                    "noise block does not match ensemble cursor");
    Ensemble out = e;
    std::vector<double> scratch;
    for (int s = 0; s < cfg.substeps_per_year; ++s) {
        const double* row = noise.row(s, scratch);
        apply_substep(out.wealths, p, cfg, row, out.seed, out.tick);
        ++out.tick;
    }
    out.time = e.time + 1.0;
    return out;
}

}  // namespace rgbm
