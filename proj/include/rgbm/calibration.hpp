#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgbm/ensemble.hpp"
#include "rgbm/inequality.hpp"

namespace rgbm {

enum class Provenance { raw, smoothed, equilibrium };

// Annual reallocation-rate series with cross-run uncertainty. stderr_ holds
// NaN where no standard error exists (single run); flags mark years whose
// value should not be trusted at face value.
struct TauSeries {
    std::vector<int> years;
    std::vector<double> tau;
    std::vector<double> stderr_;
    std::vector<bool> spin_up;
    std::vector<bool> boundary_hit;
    std::vector<bool> non_converged;
    Provenance provenance = Provenance::raw;
};

struct CalibrationConfig {
    std::size_t n_agents = 1000000;
    int n_runs = 10;
    std::uint64_t master_seed = 1;
    int substeps_per_year = 52;
    int spin_up_years = 3;
    int smoothing_window_years = 10;
    double tau_lo = -1.0;
    double tau_hi = 1.0;
    Discrepancy objective = Discrepancy::TopShareAbs;
    double tolerance = 1e-4;
    double default_sigma = 0.16;
    // Overrides bypass estimation from datasets (needed when only a share
    // series is supplied, e.g. synthetic round trips).
    std::optional<double> mu_override;
    std::optional<double> sigma_override;
};

struct Datasets {
    std::map<int, double> wealth_per_capita;                // year -> currency
    std::map<int, std::vector<ShareTarget>> share_series;   // year -> targets
    std::map<std::string, double> daily_closes;             // ISO date -> level
};

struct MuFit {
    double mu = 0.0;
    double stderr_ = 0.0;
};

// OLS slope of ln(wealth) on (year - t0).
MuFit fit_mu(const std::map<int, double>& wealth_per_capita, int t0);

// Annualized volatility from one year of daily closes: n-1 standard deviation
// of daily log returns times sqrt(250). Needs at least 30 closes.
double estimate_sigma(std::span<const double> closes);

// estimate_sigma per calendar year; years with too few closes are omitted
// (callers fall back to the configured default).
std::map<int, double> sigma_by_year(const std::map<std::string, double>& closes);

// n lognormal draws whose distribution puts target.share of the mass in the
// top q, rescaled to sample mean 1. Uses the init noise domain so the draws
// never collide with dynamics noise under the same seed.
Ensemble init_lognormal(std::size_t n, const ShareTarget& target,
                        std::uint64_t seed, double start_time = 0.0);

struct YearFit {
    double tau = 0.0;
    Ensemble next;  // state propagated one year under the fitted tau
    bool boundary_hit = false;
    bool non_converged = false;
    bool used_fallback = false;
    int evals = 0;
};

// Fits one year's tau by minimizing the share discrepancy after a one-year
// propagation replayed on frozen noise (common random numbers), so the
// objective is deterministic and the argmin reproducible.
YearFit fit_tau_year(const Ensemble& e, const ShareTarget& target, double mu,
                     double sigma, const CalibrationConfig& cfg);

// Full pipeline over n_runs seed offsets: init at the first year's observed
// share, fit every year sequentially, and average across runs. Requires the
// share series contiguous in years for the chosen q. The series is labeled by
// the year each one-year propagation starts.
TauSeries fit_tau_series(const Datasets& data, double q,
                         const CalibrationConfig& cfg);

// Centered moving average with the window truncated (never padded) at the
// ends; an even window W covers [i-W/2, i+W/2-1]. stderr combines the window
// members' standard errors as a mean of independent estimates.
TauSeries smooth(const TauSeries& series, int window_years);

struct ValidationTable {
    std::vector<int> years;
    std::vector<double> share_data;
    std::vector<double> share_model;
    std::vector<double> abs_err;
};

// Re-initializes per the fitting recipe (same seeds) and propagates the whole
// horizon under the given tau series with no refitting; reports the cross-run
// mean model share against the data per year.
ValidationTable validate_forward(const Datasets& data, const TauSeries& series,
                                 double q, const CalibrationConfig& cfg);

// Worker cap for run-level parallelism: RGBM_THREADS if set, else hardware
// concurrency.
int thread_cap();

}  // namespace rgbm
