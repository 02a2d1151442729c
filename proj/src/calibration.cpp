#include "rgbm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "rgbm/errors.hpp"
#include "rgbm/nelder_mead.hpp"
#include "rgbm/numeric.hpp"
#include "rgbm/philox.hpp"

namespace rgbm {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_config(const CalibrationConfig& cfg) {
    if (cfg.n_agents < 2 || cfg.n_runs < 1 || cfg.substeps_per_year < 1)
        throw Error(errc::invalid_state, "calibration config: bad sizes");
    if (!(cfg.tau_lo < 0.0 && cfg.tau_hi > 0.0))
        throw Error(errc::invalid_state, "tau bracket must contain 0");
    if (!(cfg.tolerance > 0.0) || cfg.spin_up_years < 0 ||
        cfg.smoothing_window_years < 1)
        throw Error(errc::invalid_state, "calibration config: bad tolerances");
    const double worst = std::max(std::fabs(cfg.tau_lo), std::fabs(cfg.tau_hi));
    if (!(1.0 / cfg.substeps_per_year < 1.0 / worst))
        throw Error(errc::invalid_state,
                    "tau bracket exceeds the step-size stability bound");
}

// Target for the chosen q in year t; exact-match on q within 1e-12.
const ShareTarget* find_target(const Datasets& data, int year, double q) {
    const auto it = data.share_series.find(year);
    if (it == data.share_series.end()) return nullptr;
    for (const auto& t : it->second)
        if (std::fabs(t.q - q) < 1e-12) return &t;
    return nullptr;
}

struct Inputs {
    std::vector<int> years;  // share-data years, contiguous
    std::vector<ShareTarget> targets;
    double mu = 0.0;
    std::vector<double> sigma_per_year;  // aligned with years[0..n-2] fits
};

Inputs resolve_inputs(const Datasets& data, double q,
                      const CalibrationConfig& cfg) {
    Inputs in;
    if (data.share_series.empty())
        throw Error(errc::empty_dataset, "no share data");
    const int y0 = data.share_series.begin()->first;
    const int y1 = data.share_series.rbegin()->first;
    for (int y = y0; y <= y1; ++y) {
        const ShareTarget* t = find_target(data, y, q);
        if (!t)
            throw Error(errc::gap, "share series has no q=" + std::to_string(q) +
                                       " entry for year " + std::to_string(y));
        in.years.push_back(y);
        in.targets.push_back(*t);
    }
    if (in.years.size() < 2)
        throw Error(errc::insufficient_data,
                    "need at least two years of share data");

    if (cfg.mu_override) {
        in.mu = *cfg.mu_override;
    } else if (!data.wealth_per_capita.empty()) {
        in.mu = fit_mu(data.wealth_per_capita, y0).mu;
    } else {
        throw Error(errc::data,
                    "no wealth-per-capita data and no mu override supplied");
    }

    const std::map<int, double> sig =
        cfg.sigma_override ? std::map<int, double>{}
                           : sigma_by_year(data.daily_closes);
    for (std::size_t k = 0; k + 1 < in.years.size(); ++k) {
        double s = cfg.default_sigma;
        if (cfg.sigma_override) {
            s = *cfg.sigma_override;
        } else {
            const auto it = sig.find(in.years[k]);
            if (it != sig.end()) s = it->second;
        }
        in.sigma_per_year.push_back(s);
    }
    return in;
}

}  // namespace

int thread_cap() {
    if (const char* env = std::getenv("RGBM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

MuFit fit_mu(const std::map<int, double>& wealth_per_capita, int t0) {
    if (wealth_per_capita.size() < 3)
        throw Error(errc::insufficient_data,
                    "fit_mu needs at least 3 wealth observations");
    std::vector<double> x, y;
    x.reserve(wealth_per_capita.size());
    y.reserve(wealth_per_capita.size());
    for (const auto& [year, w] : wealth_per_capita) {
        if (!(w > 0.0))
            throw Error(errc::data, "non-positive wealth per capita in year " +
                                        std::to_string(year));
        x.push_back(static_cast<double>(year - t0));
        y.push_back(std::log(w));
    }
    const LinearFit fit = ols_fit(x, y);
    return {fit.slope, fit.slope_stderr};
}

double estimate_sigma(std::span<const double> closes) {
    if (closes.size() < 30)
        throw Error(errc::insufficient_data,
                    "estimate_sigma needs at least 30 daily closes");
    std::vector<double> r;
    r.reserve(closes.size() - 1);
    for (std::size_t i = 1; i < closes.size(); ++i) {
        if (!(closes[i] > 0.0) || !(closes[i - 1] > 0.0))
            throw Error(errc::data, "daily closes must be positive");
        r.push_back(std::log(closes[i] / closes[i - 1]));
    }
    const double m = pairwise_mean(r);
    double ss = 0.0;
    for (double v : r) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(r.size() - 1));
    return sd * std::sqrt(250.0);
}

std::map<int, double> sigma_by_year(const std::map<std::string, double>& closes) {
    std::map<int, std::vector<double>> by_year;
    for (const auto& [date, close] : closes) {
        const int year = std::atoi(date.substr(0, 4).c_str());
        by_year[year].push_back(close);  // map order keeps dates ascending
    }
    std::map<int, double> out;
    for (const auto& [year, vals] : by_year) {
        if (vals.size() < 30) continue;
        out[year] = estimate_sigma(vals);
    }
    return out;
}

Ensemble init_lognormal(std::size_t n, const ShareTarget& target,
                        std::uint64_t seed, double start_time) {
    if (n < 2)
        throw Error(errc::invalid_state, "init_lognormal needs n >= 2");
    if (!(target.q > 0.0 && target.q < 1.0))
        throw Error(errc::invalid_state, "init_lognormal requires 0 < q < 1");
    if (!(target.share < 1.0))
        throw Error(errc::data, "init_lognormal requires share < 1");
    // share == q is the degenerate equal-wealth limit (s = 0), allowed.
    if (target.share < target.q)
        throw Error(errc::infeasible_target,
                    "lognormal cannot give the top " + std::to_string(target.q) +
                        " a share of only " + std::to_string(target.share));
    // Lorenz condition Phi(ppf(1-q) - s) = 1 - share pins the log-scale s.
    const double s = norm_ppf(1.0 - target.q) + norm_ppf(target.share);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = NoiseStream::normal(seed, 1, i, 0);
        w[i] = std::exp(s * z - 0.5 * s * s);
    }
    const double mean = pairwise_mean(w);
    for (double& v : w) v /= mean;
    Ensemble e = make_ensemble(std::move(w), start_time, seed);
    return e;
}

YearFit fit_tau_year(const Ensemble& e, const ShareTarget& target, double mu,
                     double sigma, const CalibrationConfig& cfg) {
    check_config(cfg);
    const StepConfig step = step_config(cfg.substeps_per_year);
    const NoiseBlock noise = fork_noise(e, step);
    const ShareTarget data[1] = {target};
    const auto objective = [&](double tau) {
        const Ensemble trial =
            propagate_year(e, noise, {mu, sigma, tau}, step);
        return share_discrepancy(trial.wealths, data, cfg.objective);
    };
    const MinimizeResult min = minimize_1d(objective, 0.0, 0.05, cfg.tau_lo,
                                           cfg.tau_hi, cfg.tolerance, 200);
    YearFit fit;
    fit.tau = min.x;
    fit.boundary_hit = min.boundary_hit;
    fit.non_converged = !min.converged;
    fit.used_fallback = min.used_fallback;
    fit.evals = min.evals;
    fit.next = propagate_year(e, noise, {mu, sigma, min.x}, step);
    return fit;
}

namespace {

struct RunResult {
    std::vector<double> tau;
    std::vector<bool> boundary_hit;
    std::vector<bool> non_converged;
};

RunResult run_one_fit(const Inputs& in, const CalibrationConfig& cfg,
                      std::uint64_t seed) {
    const std::size_t n_years = in.years.size() - 1;
    RunResult r;
    r.tau.resize(n_years);
    r.boundary_hit.resize(n_years);
    r.non_converged.resize(n_years);
    Ensemble e = init_lognormal(cfg.n_agents, in.targets.front(), seed,
                                static_cast<double>(in.years.front()));
    for (std::size_t k = 0; k < n_years; ++k) {
        YearFit fit = fit_tau_year(e, in.targets[k + 1], in.mu,
                                   in.sigma_per_year[k], cfg);
        r.tau[k] = fit.tau;
        r.boundary_hit[k] = fit.boundary_hit;
        r.non_converged[k] = fit.non_converged;
        e = std::move(fit.next);
    }
    return r;
}

// Fans `jobs` out over worker threads with deterministic slot assignment; the
// result vector is ordered by job index no matter the thread count.
template <class Fn>
void parallel_runs(int jobs, Fn&& fn) {
    const int workers = std::min(jobs, thread_cap());
    if (workers <= 1) {
        for (int j = 0; j < jobs; ++j) fn(j);
        return;
    }
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int j = w; j < jobs; j += workers) {
                try {
                    fn(j);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

TauSeries fit_tau_series(const Datasets& data, double q,
                         const CalibrationConfig& cfg) {
    check_config(cfg);
    const Inputs in = resolve_inputs(data, q, cfg);
    const std::size_t n_years = in.years.size() - 1;

    std::vector<RunResult> runs(cfg.n_runs);
    parallel_runs(cfg.n_runs, [&](int r) {
        runs[r] = run_one_fit(in, cfg, cfg.master_seed + static_cast<std::uint64_t>(r));
    });

    TauSeries out;
    out.provenance = Provenance::raw;
    out.years.assign(in.years.begin(), in.years.end() - 1);
    out.tau.resize(n_years);
    out.stderr_.resize(n_years);
    out.spin_up.resize(n_years);
    out.boundary_hit.resize(n_years);
    out.non_converged.resize(n_years);
    std::vector<double> per_run(cfg.n_runs);
    for (std::size_t k = 0; k < n_years; ++k) {
        bool bh = false, nc = false;
        for (int r = 0; r < cfg.n_runs; ++r) {
            per_run[r] = runs[r].tau[k];
            bh = bh || runs[r].boundary_hit[k];
            nc = nc || runs[r].non_converged[k];
        }
        const double mean = pairwise_mean(per_run);
        out.tau[k] = mean;
        if (cfg.n_runs > 1) {
            double ss = 0.0;
            for (double v : per_run) ss += (v - mean) * (v - mean);
            out.stderr_[k] = std::sqrt(ss / (cfg.n_runs - 1.0)) /
                             std::sqrt(static_cast<double>(cfg.n_runs));
        } else {
            out.stderr_[k] = kNan;
        }
        out.spin_up[k] = static_cast<int>(k) < cfg.spin_up_years;
        out.boundary_hit[k] = bh;
        out.non_converged[k] = nc;
    }
    return out;
}

TauSeries smooth(const TauSeries& series, int window_years) {
    if (window_years < 1)
        throw Error(errc::invalid_state, "smoothing window must be >= 1");
    const std::size_t n = series.years.size();
    TauSeries out = series;
    out.provenance = Provenance::smoothed;
    const int lo_off = window_years / 2;
    const int hi_off = (window_years - 1) / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a =
            static_cast<std::size_t>(std::max<long long>(0, static_cast<long long>(i) - lo_off));
        const std::size_t b = std::min(n - 1, i + static_cast<std::size_t>(hi_off));
        const std::size_t m = b - a + 1;
        double sum = 0.0, var = 0.0;
        bool have_se = true;
        for (std::size_t j = a; j <= b; ++j) {
            sum += series.tau[j];
            if (std::isnan(series.stderr_[j]))
                have_se = false;
            else
                var += series.stderr_[j] * series.stderr_[j];
        }
        out.tau[i] = sum / static_cast<double>(m);
        out.stderr_[i] = have_se ? std::sqrt(var) / static_cast<double>(m) : kNan;
    }
    return out;
}

ValidationTable validate_forward(const Datasets& data, const TauSeries& series,
                                 double q, const CalibrationConfig& cfg) {
    check_config(cfg);
    const Inputs in = resolve_inputs(data, q, cfg);
    const std::size_t n_years = in.years.size() - 1;
    if (series.years.size() < n_years ||
        series.years.front() != in.years.front())
        throw Error(errc::invalid_state,
                    "tau series does not cover the share-data horizon");
    for (std::size_t k = 0; k < n_years; ++k)
        if (series.years[k] != in.years[k])
            throw Error(errc::invalid_state, "tau series years not contiguous "
                                             "with the share data");

    const StepConfig step = step_config(cfg.substeps_per_year);
    std::vector<std::vector<double>> shares(cfg.n_runs);
    parallel_runs(cfg.n_runs, [&](int r) {
        Ensemble e = init_lognormal(cfg.n_agents, in.targets.front(),
                                    cfg.master_seed + static_cast<std::uint64_t>(r),
                                    static_cast<double>(in.years.front()));
        auto& rec = shares[r];
        rec.reserve(n_years);
        for (std::size_t k = 0; k < n_years; ++k) {
            const ModelParams p{in.mu, in.sigma_per_year[k], series.tau[k]};
            simulate_years(
                e, [&](int) { return p; }, 1, step);
            rec.push_back(top_share(e.wealths, q).share);
        }
    });

    ValidationTable out;
    std::vector<double> per_run(cfg.n_runs);
    for (std::size_t k = 0; k < n_years; ++k) {
        for (int r = 0; r < cfg.n_runs; ++r) per_run[r] = shares[r][k];
        const double model = pairwise_mean(per_run);
        const double observed = in.targets[k + 1].share;
        out.years.push_back(in.years[k + 1]);
        out.share_model.push_back(model);
        out.share_data.push_back(observed);
        out.abs_err.push_back(std::fabs(model - observed));
    }
    return out;
}

}  // namespace rgbm
