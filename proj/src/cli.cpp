#include "rgbm/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rgbm/calibration.hpp"
#include "rgbm/ensemble.hpp"
#include "rgbm/equilibrium.hpp"
#include "rgbm/errors.hpp"
#include "rgbm/inequality.hpp"
#include "rgbm/io.hpp"

namespace rgbm {

namespace {

namespace fs = std::filesystem;

int exit_code_for(const std::string& code) {
    if (code == errc::usage || code == errc::infeasible_share ||
        code == errc::infeasible_target)
        return 2;
    return 1;
}

void print_error(const std::string& code, const std::string& msg) {
    std::string clean = msg;
    for (char& c : clean)
        if (c == '"' || c == '\n') c = '\'';
    std::fprintf(stderr, "error code=%s msg=\"%s\"\n", code.c_str(),
                 clean.c_str());
}

// Per-year sigma under the same precedence the calibration pipeline uses:
// explicit override, else estimated from closes, else the default constant.
double sigma_for_year(int year, const CalibrationConfig& cfg,
                      const std::map<int, double>& estimated) {
    if (cfg.sigma_override) return *cfg.sigma_override;
    const auto it = estimated.find(year);
    return it == estimated.end() ? cfg.default_sigma : it->second;
}

struct TauSegment {
    double tau;
    int years;
};

// "0.02:40,-0.02:40" -> two segments.
std::vector<TauSegment> parse_profile(const std::string& text) {
    std::vector<TauSegment> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string part =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        const std::size_t colon = part.find(':');
        if (part.empty() || colon == std::string::npos)
            throw Error(errc::usage,
                        "bad tau profile segment '" + part +
                            "' (want tau:years,...)");
        try {
            const double tau = std::stod(part.substr(0, colon));
            const int years = std::stoi(part.substr(colon + 1));
            if (years < 1) throw std::invalid_argument("years");
            out.push_back({tau, years});
        } catch (const std::exception&) {
            throw Error(errc::usage, "bad tau profile segment '" + part + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw Error(errc::usage, "empty tau profile");
    return out;
}

void cmd_fit_mu(const std::string& wealth_path, std::optional<int> t0) {
    const auto wealth = load_wealth_per_capita(wealth_path);
    if (wealth.empty()) throw Error(errc::empty_dataset, "no wealth data");
    const int base = t0 ? *t0 : wealth.begin()->first;
    const MuFit fit = fit_mu(wealth, base);
    std::printf("mu,stderr\n%s,%s\n", format_g12(fit.mu).c_str(),
                format_g12(fit.stderr_).c_str());
}

void cmd_fit_sigma(const std::string& closes_path, std::optional<int> year) {
    const auto closes = load_daily_closes(closes_path);
    const auto by_year = sigma_by_year(closes);
    if (year) {
        const auto it = by_year.find(*year);
        if (it == by_year.end())
            throw Error(errc::insufficient_data,
                        "no sigma estimate for year " + std::to_string(*year) +
                            " (need at least 30 closes)");
        std::printf("year,sigma\n%d,%s\n", it->first,
                    format_g12(it->second).c_str());
        return;
    }
    if (by_year.empty())
        throw Error(errc::insufficient_data,
                    "no year has enough closes for a sigma estimate");
    std::printf("year,sigma\n");
    for (const auto& [y, s] : by_year)
        std::printf("%d,%s\n", y, format_g12(s).c_str());
}

void cmd_fit_tau(const std::string& manifest_path) {
    const RunManifest m = load_manifest(manifest_path);
    const Datasets data = load_datasets(m);
    fs::create_directories(m.output_dir);
    const TauSeries raw = fit_tau_series(data, m.q, m.calibration);
    const TauSeries smoothed =
        smooth(raw, m.calibration.smoothing_window_years);
    const ValidationTable val =
        validate_forward(data, smoothed, m.q, m.calibration);
    write_tau_series(m.output_dir + "/tau_raw.csv", raw);
    write_tau_series(m.output_dir + "/tau_smoothed.csv", smoothed);
    write_validation(m.output_dir + "/validation.csv", val);
}

void cmd_smooth(const std::string& in_path, const std::string& out_path,
                int window) {
    write_tau_series(out_path, smooth(read_tau_series(in_path), window));
}

void cmd_validate(const std::string& manifest_path,
                  const std::string& tau_path, std::string out_path) {
    const RunManifest m = load_manifest(manifest_path);
    const Datasets data = load_datasets(m);
    const TauSeries series = read_tau_series(tau_path);
    const ValidationTable val =
        validate_forward(data, series, m.q, m.calibration);
    if (out_path.empty()) {
        fs::create_directories(m.output_dir);
        out_path = m.output_dir + "/validation.csv";
    }
    write_validation(out_path, val);
}

void cmd_eqm_direct(double q, double share, double sigma) {
    const double tau = tau_eqm({q, share}, sigma);
    std::printf("tau_eqm\n%s\n", format_g12(tau).c_str());
}

void cmd_eqm_table(const std::string& manifest_path) {
    const RunManifest m = load_manifest(manifest_path);
    const Datasets data = load_datasets(m);
    const std::map<int, double> estimated =
        m.calibration.sigma_override ? std::map<int, double>{}
                                     : sigma_by_year(data.daily_closes);
    std::vector<EqmRow> rows;
    for (const auto& [year, targets] : data.share_series) {
        for (const auto& t : targets) {
            if (std::fabs(t.q - m.q) >= 1e-12) continue;
            EqmRow row;
            row.year = year;
            const double sigma = sigma_for_year(year, m.calibration, estimated);
            try {
                row.tau = tau_eqm(t, sigma);
                row.feasible = true;
            } catch (const Error& e) {
                if (e.code() != errc::infeasible_share) throw;
                row.feasible = false;
            }
            rows.push_back(row);
        }
    }
    if (rows.empty())
        throw Error(errc::gap, "share series has no rows for q=" +
                                   std::to_string(m.q));
    fs::create_directories(m.output_dir);
    write_tau_eqm(m.output_dir + "/tau_eqm.csv", rows);
}

struct SimulateArgs {
    double tau = 0.0;
    std::size_t n = 1000;
    int years = 10;
    std::uint64_t seed = 1;
    double mu = 0.021;
    double sigma = 0.16;
    int substeps = 52;
    std::string init = "equal";
    double q = 0.1;
    double share = 0.66;
    double t0 = 0.0;
    std::string out = "snapshot.csv";
    std::string trace;
};

void cmd_simulate(const SimulateArgs& a) {
    if (a.n < 2 || a.years < 0)
        throw Error(errc::usage, "simulate needs --n >= 2 and --years >= 0");
    Ensemble e;
    if (a.init == "equal") {
        e = make_ensemble(std::vector<double>(a.n, 1.0), a.t0, a.seed);
    } else if (a.init == "lognormal") {
        e = init_lognormal(a.n, {a.q, a.share}, a.seed, a.t0);
    } else {
        throw Error(errc::usage, "--init must be 'equal' or 'lognormal'");
    }
    const StepConfig cfg = step_config(a.substeps);
    const ModelParams p{a.mu, a.sigma, a.tau};
    std::string trace_rows = "year,mean,top_share\n";
    const Observer observer = [&](const Ensemble& view) {
        trace_rows += std::to_string(static_cast<int>(std::llround(view.time)));
        trace_rows += ',';
        trace_rows += format_g12(sample_mean(view));
        trace_rows += ',';
        trace_rows += format_g12(top_share(view.wealths, a.q).share);
        trace_rows += '\n';
    };
    simulate_years(
        e, [&](int) { return p; }, a.years, cfg,
        a.trace.empty() ? Observer{} : observer);
    write_snapshot(a.out, e);
    if (!a.trace.empty()) write_text_atomic(a.trace, trace_rows);
}

struct SynthArgs {
    std::string profile = "0.02:40,-0.02:40";
    std::size_t n = 100000;
    std::uint64_t seed = 999;
    double mu = 0.021;
    double sigma = 0.16;
    int substeps = 52;
    double q = 0.1;
    double share0 = 0.4;
    int t0 = 1900;
    std::string out_dir = ".";
};

// One simulated realization serves as the synthetic "observed" share series;
// the generating tau path is written alongside for round-trip comparison.
void cmd_synth(const SynthArgs& a) {
    const std::vector<TauSegment> profile = parse_profile(a.profile);
    fs::create_directories(a.out_dir);
    Ensemble e = init_lognormal(a.n, {a.q, a.share0}, a.seed,
                                static_cast<double>(a.t0));
    const StepConfig cfg = step_config(a.substeps);
    std::map<int, std::vector<ShareTarget>> shares;
    shares[a.t0] = {{a.q, top_share(e.wealths, a.q).share}};
    TauSeries truth;
    truth.provenance = Provenance::raw;
    int year = a.t0;
    for (const auto& seg : profile) {
        const ModelParams p{a.mu, a.sigma, seg.tau};
        for (int k = 0; k < seg.years; ++k) {
            truth.years.push_back(year);
            truth.tau.push_back(seg.tau);
            truth.stderr_.push_back(std::numeric_limits<double>::quiet_NaN());
            truth.spin_up.push_back(false);
            truth.boundary_hit.push_back(false);
            truth.non_converged.push_back(false);
            simulate_years(
                e, [&](int) { return p; }, 1, cfg);
            ++year;
            shares[year] = {{a.q, top_share(e.wealths, a.q).share}};
        }
    }
    write_share_series(a.out_dir + "/shares.csv", shares);
    write_tau_series(a.out_dir + "/tau_true.csv", truth);
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"reallocating geometric Brownian motion toolkit"};
    app.require_subcommand(1);

    auto* fit_mu_cmd = app.add_subcommand(
        "fit-mu", "estimate the drift from wealth-per-capita data");
    std::string wealth_path;
    std::optional<int> mu_t0;
    fit_mu_cmd->add_option("--wealth", wealth_path, "wealth_per_capita.csv")
        ->required();
    fit_mu_cmd->add_option("--t0", mu_t0, "regression origin year");

    auto* fit_sigma_cmd = app.add_subcommand(
        "fit-sigma", "estimate annualized volatility from daily closes");
    std::string closes_path;
    std::optional<int> sigma_year;
    fit_sigma_cmd->add_option("--closes", closes_path, "closes.csv")->required();
    fit_sigma_cmd->add_option("--year", sigma_year, "single year to report");

    auto* fit_tau_cmd = app.add_subcommand(
        "fit-tau", "fit the annual reallocation-rate series");
    std::string fit_manifest;
    fit_tau_cmd->add_option("--manifest", fit_manifest, "run manifest JSON")
        ->required();

    auto* smooth_cmd =
        app.add_subcommand("smooth", "moving-average a tau series file");
    std::string smooth_in, smooth_out;
    int smooth_window = 10;
    smooth_cmd->add_option("--in", smooth_in, "input tau CSV")->required();
    smooth_cmd->add_option("--out", smooth_out, "output tau CSV")->required();
    smooth_cmd->add_option("--window", smooth_window, "window in years");

    auto* validate_cmd = app.add_subcommand(
        "validate", "forward-propagate a tau series against the data");
    std::string val_manifest, val_tau, val_out;
    validate_cmd->add_option("--manifest", val_manifest, "run manifest JSON")
        ->required();
    validate_cmd->add_option("--tau", val_tau, "tau series CSV")->required();
    validate_cmd->add_option("--out", val_out, "output CSV path");

    auto* eqm_cmd = app.add_subcommand(
        "eqm", "equilibrium reallocation rate from an observed share");
    std::string eqm_manifest;
    std::optional<double> eqm_q, eqm_share, eqm_sigma;
    eqm_cmd->add_option("--manifest", eqm_manifest,
                        "per-year table from a manifest");
    eqm_cmd->add_option("--q", eqm_q, "population fraction");
    eqm_cmd->add_option("--share", eqm_share, "observed share");
    eqm_cmd->add_option("--sigma", eqm_sigma, "volatility");

    auto* simulate_cmd =
        app.add_subcommand("simulate", "run the model and write a snapshot");
    SimulateArgs sim;
    simulate_cmd->add_option("--tau", sim.tau, "reallocation rate");
    simulate_cmd->add_option("--n", sim.n, "agents")->required();
    simulate_cmd->add_option("--years", sim.years, "years to run")->required();
    simulate_cmd->add_option("--seed", sim.seed, "master seed");
    simulate_cmd->add_option("--mu", sim.mu, "drift");
    simulate_cmd->add_option("--sigma", sim.sigma, "volatility");
    simulate_cmd->add_option("--substeps", sim.substeps, "substeps per year");
    simulate_cmd->add_option("--init", sim.init, "equal | lognormal");
    simulate_cmd->add_option("--q", sim.q, "top fraction for init/trace");
    simulate_cmd->add_option("--share", sim.share, "lognormal init share");
    simulate_cmd->add_option("--t0", sim.t0, "start time (years)");
    simulate_cmd->add_option("--out", sim.out, "snapshot CSV path");
    simulate_cmd->add_option("--trace", sim.trace, "per-year trace CSV path");

    auto* synth_cmd = app.add_subcommand(
        "synth", "generate a synthetic share series from a known tau path");
    SynthArgs syn;
    synth_cmd->add_option("--profile", syn.profile, "tau:years,... segments");
    synth_cmd->add_option("--n", syn.n, "agents");
    synth_cmd->add_option("--seed", syn.seed, "master seed");
    synth_cmd->add_option("--mu", syn.mu, "drift");
    synth_cmd->add_option("--sigma", syn.sigma, "volatility");
    synth_cmd->add_option("--substeps", syn.substeps, "substeps per year");
    synth_cmd->add_option("--q", syn.q, "top fraction observed");
    synth_cmd->add_option("--share0", syn.share0, "initial top-q share");
    synth_cmd->add_option("--t0", syn.t0, "first data year");
    synth_cmd->add_option("--out-dir", syn.out_dir, "output directory");

    std::vector<const char*> cargv;
    cargv.reserve(argv.size());
    for (const auto& s : argv) cargv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()),
                  const_cast<char**>(cargv.data()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(errc::usage, e.what());
        return 2;
    }

    try {
        if (fit_mu_cmd->parsed()) {
            cmd_fit_mu(wealth_path, mu_t0);
        } else if (fit_sigma_cmd->parsed()) {
            cmd_fit_sigma(closes_path, sigma_year);
        } else if (fit_tau_cmd->parsed()) {
            cmd_fit_tau(fit_manifest);
        } else if (smooth_cmd->parsed()) {
            cmd_smooth(smooth_in, smooth_out, smooth_window);
        } else if (validate_cmd->parsed()) {
            cmd_validate(val_manifest, val_tau, val_out);
        } else if (eqm_cmd->parsed()) {
            if (!eqm_manifest.empty()) {
                cmd_eqm_table(eqm_manifest);
            } else {
                if (!eqm_q || !eqm_share || !eqm_sigma)
                    throw Error(errc::usage,
                                "eqm needs --manifest or all of --q --share "
                                "--sigma");
                cmd_eqm_direct(*eqm_q, *eqm_share, *eqm_sigma);
            }
        } else if (simulate_cmd->parsed()) {
            cmd_simulate(sim);
        } else if (synth_cmd->parsed()) {
            cmd_synth(syn);
        }
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 0;
}

}  // namespace rgbm
