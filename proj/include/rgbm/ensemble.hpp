#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace rgbm {

// Model parameters for dx = x(mu dt + sigma dW) - tau (x - <x>) dt.
// tau may take either sign; tau < 0 drives wealths negative by design.
struct ModelParams {
    double mu = 0.0;     // 1/year
    double sigma = 0.0;  // 1/sqrt(year)
    double tau = 0.0;    // 1/year
};

struct StepConfig {
    double dt = 1.0 / 52.0;  // years
    int substeps_per_year = 52;
};

StepConfig step_config(int substeps_per_year);

// Population state. `tick` counts substeps taken since the seed epoch and is
// the only RNG cursor: noise for (agent i, tick t) is a pure function of
// (seed, i, t), so trajectories do not depend on execution order.
struct Ensemble {
    std::vector<double> wealths;
    double time = 0.0;  // calendar years, e.g. 1917.0
    std::uint64_t seed = 0;
    std::uint64_t tick = 0;
};

Ensemble make_ensemble(std::vector<double> wealths, double start_time,
                       std::uint64_t seed);

double sample_mean(const Ensemble& e);

// One Euler-Maruyama substep on the arithmetic form, mean from pre-step
// wealths. Reallocation sums to exactly zero over the population.
void step(Ensemble& e, const ModelParams& p, const StepConfig& cfg);

using Observer = std::function<void(const Ensemble&)>;
using ParamSchedule = std::function<ModelParams(int year)>;

// Runs substeps_per_year * n_years steps; time is re-anchored at every year
// boundary (start + k exactly) and the observer, if set, sees each boundary.
// The schedule is keyed by the integer calendar year at the segment start.
void simulate_years(Ensemble& e, const ParamSchedule& schedule, int n_years,
                    const StepConfig& cfg, const Observer& observer = {});

// One year of Gaussian variates frozen at an ensemble's current cursor.
// Replaying them under different tau isolates the reallocation effect and
// makes calibration objectives deterministic (common random numbers).
// Materializes the full block when it fits the memory budget, otherwise
// regenerates rows on demand.
class NoiseBlock {
  public:
    NoiseBlock(std::uint64_t seed, std::uint64_t base_tick, std::size_t n_agents,
               int substeps);

    // Variates for substep s, all agents. Returns a pointer into the cache or
    // into `scratch` after filling it.
    const double* row(int s, std::vector<double>& scratch) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t base_tick() const { return base_tick_; }
    std::size_t n_agents() const { return n_; }
    int substeps() const { return substeps_; }
    bool cached() const { return !cache_.empty(); }

  private:
    std::uint64_t seed_;
    std::uint64_t base_tick_;
    std::size_t n_;
    int substeps_;
    std::vector<double> cache_;  // layout [s * n_ + i]; empty when over budget
};

NoiseBlock fork_noise(const Ensemble& e, const StepConfig& cfg);

// Advances a copy of `e` by one year replaying the frozen block; bit-identical
// to live stepping with the same seed/tick under the same params.
Ensemble propagate_year(const Ensemble& e, const NoiseBlock& noise,
                        const ModelParams& p, const StepConfig& cfg);

}  // namespace rgbm
