// Acceptance gate: eight end-to-end checks, one pass/fail line each.
// Exit code 0 only when every criterion holds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rgbm/calibration.hpp"
#include "rgbm/cli.hpp"
#include "rgbm/ensemble.hpp"
#include "rgbm/equilibrium.hpp"
#include "rgbm/errors.hpp"
#include "rgbm/inequality.hpp"
#include "rgbm/io.hpp"

using namespace rgbm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "rgbm");
    return run_command(args);
}

// Shared state produced by criterion 5 and reused by criterion 6.
struct SynthRun {
    std::string data_dir;
    std::string fit_dir;
    CalibrationConfig cfg;
    bool ready = false;
};
SynthRun g_synth;

CalibrationConfig synth_fit_config() {
    CalibrationConfig cfg;
    cfg.n_agents = 100000;
    cfg.n_runs = 10;
    cfg.master_seed = 31337;  // deliberately not the generator's seed
    cfg.spin_up_years = 3;
    cfg.smoothing_window_years = 10;
    cfg.mu_override = 0.021;
    cfg.sigma_override = 0.16;
    return cfg;
}

double mean_abs_err_from_csv(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    double sum = 0.0;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        sum += std::stod(line.substr(line.rfind(',') + 1));
        ++n;
    }
    return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

// 1. Equilibration time at the fitted maximum reallocation rate.
bool criterion_equilibration_time(std::string& note) {
    const double got = equilibration_time(0.02, 0.14);
    const double want = 1.0 / (2.0 * 0.02 - 0.14 * 0.14);
    const bool exact = std::fabs(got - want) < 1e-12;
    const bool three_digits = std::fabs(got - 49.0) < 0.05;
    std::ostringstream os;
    os << "time=" << got << "y, formula=" << want << ", rounds to 49.0";
    note = os.str();
    return exact && three_digits;
}

// 2. Zero-reallocation median log-wealth growth matches (mu - sigma^2/2) T.
bool criterion_median_growth(std::string& note) {
    const auto t0 = Clock::now();
    const std::size_t n = 10000;
    const double mu = 0.021, sigma = 0.14;
    const int years = 50;
    Ensemble e = make_ensemble(std::vector<double>(n, 1.0), 0.0, 101);
    const ModelParams p{mu, sigma, 0.0};
    simulate_years(
        e, [&](int) { return p; }, years, step_config(52));
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(e.wealths[i]);
    const double med = median(logs);

    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const int B = 1000;
    std::vector<double> boot(B), resample(n);
    for (int b = 0; b < B; ++b) {
        for (std::size_t i = 0; i < n; ++i) resample[i] = logs[pick(rng)];
        boot[b] = median(resample);
    }
    const double m = mean(boot);
    double var = 0.0;
    for (double x : boot) var += (x - m) * (x - m);
    const double se = std::sqrt(var / (B - 1));

    const double target = (mu - sigma * sigma / 2.0) * years;
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "median=" << med << ", target=" << target << ", |dev|/se="
       << std::fabs(med - target) / se << " (<=3), t=" << dt << "s (<10)";
    note = os.str();
    return se > 0.0 && std::fabs(med - target) <= 3.0 * se && dt < 10.0;
}

// 3. Drift regression: exact data to 1e-6, noisy data within 2 stderr.
bool criterion_mu_regression(std::string& note) {
    std::map<int, double> exact;
    for (int y = 1900; y < 1950; ++y)
        exact[y] = std::exp(0.021 * (y - 1900));
    const MuFit clean = fit_mu(exact, 1900);

    std::mt19937_64 rng(303);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::map<int, double> noisy;
    for (int y = 1900; y < 1995; ++y)
        noisy[y] = std::exp(0.021 * (y - 1900)) * (1.0 + 0.05 * gauss(rng));
    const MuFit rough = fit_mu(noisy, 1900);

    std::ostringstream os;
    os << "exact mu=" << clean.mu << " (|dev|=" << std::fabs(clean.mu - 0.021)
       << "), noisy mu=" << rough.mu << " +- " << rough.stderr_;
    note = os.str();
    return std::fabs(clean.mu - 0.021) <= 1e-6 &&
           std::fabs(rough.mu - 0.021) <= 2.0 * rough.stderr_;
}

// 4. Long-run ensemble vs the stationary model: variance formula and
//    quadrature top share, time-averaged over the last century.
bool criterion_stationary_dual(std::string& note) {
    const auto t0 = Clock::now();
    const double tau = 0.1, sigma = 0.14, q = 0.1;
    Ensemble e = make_ensemble(std::vector<double>(100000, 1.0), 0.0, 404);
    const ModelParams p{0.021, sigma, tau};
    double sum_var = 0.0, sum_share = 0.0;
    int n_obs = 0;
    const Observer obs = [&](const Ensemble& v) {
        if (v.time <= 400.0) return;
        const double m = sample_mean(v);
        double acc = 0.0;
        for (double w : v.wealths) {
            const double d = w / m - 1.0;
            acc += d * d;
        }
        sum_var += acc / static_cast<double>(v.wealths.size() - 1);
        sum_share += top_share(v.wealths, q).share;
        ++n_obs;
    };
    simulate_years(
        e, [&](int) { return p; }, 500, step_config(52), obs);
    const double var_sim = sum_var / n_obs;
    const double share_sim = sum_share / n_obs;
    const double var_formula = sigma * sigma / (2.0 * tau - sigma * sigma);
    const double share_quad = stationary_top_share(stationary_model(tau, sigma), q);
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "var=" << var_sim << " vs " << var_formula << " (rel "
       << std::fabs(var_sim - var_formula) / var_formula << " <=0.05), share="
       << share_sim << " vs " << share_quad << " (|dev| "
       << std::fabs(share_sim - share_quad) << " <=0.005), t=" << dt
       << "s (<120)";
    note = os.str();
    return std::fabs(var_sim - var_formula) / var_formula <= 0.05 &&
           std::fabs(share_sim - share_quad) <= 0.005 && dt < 120.0;
}

// 5. Synthetic round trip: recover a +0.02 / -0.02 reallocation profile from
//    generated shares alone, with an independent fitting seed.
bool criterion_tau_round_trip(std::string& note) {
    const auto t0 = Clock::now();
    const fs::path work = fs::temp_directory_path() / "rgbm_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    g_synth.data_dir = (work / "synth").string();
    g_synth.fit_dir = (work / "fit").string();
    g_synth.cfg = synth_fit_config();

    if (run({"synth", "--profile", "0.02:40,-0.02:40", "--n", "100000",
             "--seed", "999", "--out-dir", g_synth.data_dir}) != 0) {
        note = "synth command failed";
        return false;
    }
    const std::string manifest = (work / "manifest.json").string();
    {
        std::ofstream out(manifest);
        out << "{\n"
            << "  \"format\": \"rgbm-manifest/1\",\n"
            << "  \"datasets\": {\"shares\": \"" << g_synth.data_dir
            << "/shares.csv\"},\n"
            << "  \"output_dir\": \"" << g_synth.fit_dir << "\",\n"
            << "  \"q\": 0.1,\n"
            << "  \"calibration\": {\n"
            << "    \"n_agents\": 100000, \"n_runs\": 10,\n"
            << "    \"master_seed\": 31337, \"spin_up_years\": 3,\n"
            << "    \"smoothing_window_years\": 10,\n"
            << "    \"mu\": 0.021, \"sigma\": 0.16\n"
            << "  }\n"
            << "}\n";
    }
    if (run({"fit-tau", "--manifest", manifest}) != 0) {
        note = "fit-tau command failed";
        return false;
    }
    g_synth.ready = true;

    const TauSeries sm = read_tau_series(g_synth.fit_dir + "/tau_smoothed.csv");
    // Breakpoint at 1940; a 10-year smoothing window mixes the plateaus for
    // five years on either side, so that band and the spin-up are excluded.
    int checked = 0;
    double max_dev = 0.0;
    bool second_all_negative = true;
    for (std::size_t i = 0; i < sm.years.size(); ++i) {
        const int y = sm.years[i];
        if (y - 1900 < 3) continue;
        if (std::abs(y - 1940) <= 5) continue;
        const double truth = y < 1940 ? 0.02 : -0.02;
        max_dev = std::max(max_dev, std::fabs(sm.tau[i] - truth));
        if (y >= 1940 && !(sm.tau[i] < 0.0)) second_all_negative = false;
        ++checked;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "max |tau - truth|=" << max_dev << " (<=0.01) over " << checked
       << " years, second plateau negative=" << (second_all_negative ? "yes" : "no")
       << ", t=" << dt << "s (<1800)";
    note = os.str();
    return checked > 60 && max_dev <= 0.01 && second_all_negative && dt < 1800.0;
}

// 6. Equilibrium analysis on the same synthetic data: inferred rates are
//    positive wherever defined, and forward errors dwarf the dynamic fit's.
bool criterion_equilibrium_contrast(std::string& note) {
    if (!g_synth.ready) {
        note = "skipped: synthetic round trip did not produce outputs";
        return false;
    }
    const auto shares = load_share_series(g_synth.data_dir + "/shares.csv");
    bool all_positive_or_infeasible = true;
    TauSeries eq;
    eq.provenance = Provenance::equilibrium;
    const int last_fit_year = 1979;
    for (const auto& [year, targets] : shares) {
        bool feasible = true;
        double tau = 0.0;
        try {
            tau = tau_eqm(targets[0], 0.16);
            if (!(tau > 0.0)) all_positive_or_infeasible = false;
        } catch (const Error& err) {
            if (err.code() != std::string(errc::infeasible_share)) throw;
            feasible = false;
        }
        if (year > last_fit_year) continue;
        if (!feasible) {
            note = "infeasible year inside the propagation horizon";
            return false;
        }
        eq.years.push_back(year);
        eq.tau.push_back(tau);
        eq.stderr_.push_back(std::numeric_limits<double>::quiet_NaN());
        eq.spin_up.push_back(false);
        eq.boundary_hit.push_back(false);
        eq.non_converged.push_back(false);
    }

    Datasets data;
    data.share_series = shares;
    const ValidationTable v_eq = validate_forward(data, eq, 0.1, g_synth.cfg);
    const double err_eq = mean(v_eq.abs_err);
    const double err_dyn =
        mean_abs_err_from_csv(g_synth.fit_dir + "/validation.csv");
    std::ostringstream os;
    os << "all tau_eqm positive/infeasible="
       << (all_positive_or_infeasible ? "yes" : "no") << ", mean err eqm="
       << err_eq << " vs dynamic=" << err_dyn << " (ratio "
       << err_eq / err_dyn << " >=3)";
    note = os.str();
    return all_positive_or_infeasible && err_eq >= 3.0 * err_dyn;
}

// 7. Inequality measures against brute-force enumeration plus the
//    transfer principle on random instances.
bool criterion_inequality_oracles(std::string& note) {
    const auto t0 = Clock::now();
    double max_dev = 0.0;
    long n_vectors = 0;
    for (int len = 2; len <= 8; ++len) {
        std::vector<int> idx(len, 1);
        for (;;) {
            std::vector<double> v(idx.begin(), idx.end());
            ++n_vectors;
            max_dev = std::max(
                max_dev, std::fabs(gini(v).value - oracle::gini_double_sum(v)));
            for (double q : {0.25, 0.5, 0.75}) {
                const std::size_t k = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::llround(q * len)));
                max_dev = std::max(
                    max_dev, std::fabs(top_share(v, q).share -
                                       oracle::top_share_sorted(v, k)));
            }
            int d = len - 1;
            while (d >= 0 && idx[d] == 5) idx[d--] = 1;
            if (d < 0) break;
            ++idx[d];
        }
    }

    oracle::SplitMix rng(707);
    int violations = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 3 + rng.next() % 48;
        std::vector<double> v(n);
        for (double& x : v) x = 0.1 + 9.9 * rng.uniform();
        std::size_t i = rng.next() % n, j = rng.next() % n;
        if (v[i] < v[j]) std::swap(i, j);
        if (i == j || v[i] == v[j]) continue;
        // rich-to-poor transfer small enough to preserve the ranking
        const double delta = 0.5 * rng.uniform() * (v[i] - v[j]);
        std::vector<double> after = v;
        after[i] -= delta;
        after[j] += delta;
        if (gini(after).value > gini(v).value + 1e-12) ++violations;
        if (top_share(after, 0.25).share > top_share(v, 0.25).share + 1e-12)
            ++violations;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "enumeration max dev=" << max_dev << " (<=1e-12) over " << n_vectors
       << " vectors, transfer violations=" << violations << "/" << trials
       << ", t=" << dt << "s (<60)";
    note = os.str();
    return max_dev <= 1e-12 && violations == 0 && dt < 60.0;
}

// 8. Identical manifests give byte-identical outputs whatever the thread cap.
bool criterion_determinism(std::string& note) {
    const fs::path work = fs::temp_directory_path() / "rgbm_acceptance_threads";
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string data_dir = (work / "synth").string();
    if (run({"synth", "--profile", "0.03:3,-0.01:3", "--n", "2000", "--seed",
             "77", "--out-dir", data_dir}) != 0) {
        note = "synth command failed";
        return false;
    }
    const auto manifest_for = [&](const std::string& tag) {
        const std::string path = (work / ("m_" + tag + ".json")).string();
        std::ofstream out(path);
        out << "{\n"
            << "  \"format\": \"rgbm-manifest/1\",\n"
            << "  \"datasets\": {\"shares\": \"" << data_dir
            << "/shares.csv\"},\n"
            << "  \"output_dir\": \"" << (work / ("out_" + tag)).string()
            << "\",\n"
            << "  \"q\": 0.1,\n"
            << "  \"calibration\": {\n"
            << "    \"n_agents\": 2000, \"n_runs\": 4, \"master_seed\": 55,\n"
            << "    \"spin_up_years\": 1, \"smoothing_window_years\": 3,\n"
            << "    \"mu\": 0.021, \"sigma\": 0.16\n"
            << "  }\n"
            << "}\n";
        return path;
    };
    const std::vector<std::pair<std::string, const char*>> settings = {
        {"t1", "1"}, {"t4", "4"}, {"tmax", nullptr}};
    for (const auto& [tag, env] : settings) {
        if (env)
            ::setenv("RGBM_THREADS", env, 1);
        else
            ::unsetenv("RGBM_THREADS");
        const int rc = run({"fit-tau", "--manifest", manifest_for(tag)});
        if (rc != 0) {
            ::unsetenv("RGBM_THREADS");
            note = "fit-tau failed under thread setting " + tag;
            return false;
        }
    }
    ::unsetenv("RGBM_THREADS");
    const auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool identical = true;
    for (const char* f : {"tau_raw.csv", "tau_smoothed.csv", "validation.csv"}) {
        const std::string ref = slurp((work / "out_t1" / f).string());
        identical = identical && !ref.empty() &&
                    ref == slurp((work / "out_t4" / f).string()) &&
                    ref == slurp((work / "out_tmax" / f).string());
    }
    note = identical ? "1/4/max-thread outputs byte-identical"
                     : "outputs differ across thread caps";
    return identical;
}

}  // namespace

int main() {
    struct Item {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Item items[] = {
        {"equilibration time", criterion_equilibration_time},
        {"median growth at tau=0", criterion_median_growth},
        {"drift regression", criterion_mu_regression},
        {"stationary distribution dual oracle", criterion_stationary_dual},
        {"tau round trip", criterion_tau_round_trip},
        {"equilibrium contrast", criterion_equilibrium_contrast},
        {"inequality oracles", criterion_inequality_oracles},
        {"thread determinism", criterion_determinism},
    };
    int passed = 0, total = 0;
    for (const auto& item : items) {
        ++total;
        std::string note;
        bool ok = false;
        try {
            ok = item.fn(note);
        } catch (const std::exception& e) {
            note = std::string("exception: ") + e.what();
        }
        std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", total, item.name,
                    note.c_str());
        std::fflush(stdout);
        if (ok) ++passed;
    }
    std::printf("acceptance: %d/%d criteria passed\n", passed, total);
    return passed == total ? 0 : 1;
}
