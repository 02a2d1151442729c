#include "rgbm/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <system_error>

#include <json.hpp>

#include "rgbm/errors.hpp"

namespace rgbm {

namespace {

using nlohmann::json;

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void parse_fail(const std::string& path, int line_no,
                             const std::string& what) {
    throw Error(errc::parse, path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        parse_fail(path, line_no, "bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& path, int line_no) {
    int v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        parse_fail(path, line_no, "bad integer '" + s + "'");
    return v;
}

// Opens, checks the exact header, and hands back data lines with numbers.
std::vector<std::pair<int, std::vector<std::string>>> read_csv(
    const std::string& path, const std::string& header, std::size_t n_fields) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw Error(errc::empty_dataset, path + " is empty");
    if (strip_cr(line) != header)
        throw Error(errc::parse,
                    path + ":1: expected header '" + header + "'");
    std::vector<std::pair<int, std::vector<std::string>>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != n_fields)
            parse_fail(path, line_no,
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
        rows.emplace_back(line_no, std::move(fields));
    }
    if (rows.empty()) throw Error(errc::empty_dataset, path + " has no data rows");
    return rows;
}

bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int mm = (s[5] - '0') * 10 + (s[6] - '0');
    const int dd = (s[8] - '0') * 10 + (s[9] - '0');
    return mm >= 1 && mm <= 12 && dd >= 1 && dd <= 31;
}

}  // namespace

std::string format_g12(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    if (ec != std::errc()) throw Error(errc::io, "number formatting failed");
    return std::string(buf, ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() /
                         (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(errc::io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(errc::io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw Error(errc::io,
                    "cannot move " + tmp.string() + " to " + path + ": " +
                        ec.message());
}

std::map<int, std::vector<ShareTarget>> load_share_series(const std::string& path) {
    std::map<int, std::vector<ShareTarget>> out;
    for (const auto& [line_no, f] : read_csv(path, "year,q,share", 3)) {
        const int year = parse_int(f[0], path, line_no);
        const double q = parse_double(f[1], path, line_no);
        const double share = parse_double(f[2], path, line_no);
        if (!(q > 0.0 && q < 1.0))
            throw Error(errc::validation, path + ":" + std::to_string(line_no) +
                                              ": q must be in (0,1)");
        if (!(share > 0.0 && share <= 1.0))
            throw Error(errc::validation, path + ":" + std::to_string(line_no) +
                                              ": share must be in (0,1]");
        auto& targets = out[year];
        for (const auto& t : targets)
            if (std::fabs(t.q - q) < 1e-12)
                throw Error(errc::duplicate_key,
                            path + ":" + std::to_string(line_no) +
                                ": duplicate (year,q) = (" + f[0] + "," + f[1] + ")");
        targets.push_back({q, share});
    }
    return out;
}

std::map<int, double> load_wealth_per_capita(const std::string& path) {
    std::map<int, double> out;
    for (const auto& [line_no, f] : read_csv(path, "year,value", 2)) {
        const int year = parse_int(f[0], path, line_no);
        const double value = parse_double(f[1], path, line_no);
        if (!std::isfinite(value))
            throw Error(errc::validation, path + ":" + std::to_string(line_no) +
                                              ": value must be finite");
        if (!out.emplace(year, value).second)
            throw Error(errc::duplicate_key, path + ":" +
                                                 std::to_string(line_no) +
                                                 ": duplicate year " + f[0]);
    }
    return out;
}

std::map<std::string, double> load_daily_closes(const std::string& path) {
    std::map<std::string, double> out;
    for (const auto& [line_no, f] : read_csv(path, "date,close", 2)) {
        if (!valid_iso_date(f[0]))
            parse_fail(path, line_no, "bad ISO date '" + f[0] + "'");
        const double close = parse_double(f[1], path, line_no);
        if (!(close > 0.0))
            throw Error(errc::validation, path + ":" + std::to_string(line_no) +
                                              ": close must be positive");
        if (!out.emplace(f[0], close).second)
            throw Error(errc::duplicate_key, path + ":" +
                                                 std::to_string(line_no) +
                                                 ": duplicate date " + f[0]);
    }
    return out;
}

void write_tau_series(const std::string& path, const TauSeries& series) {
    std::string s = "year,tau,stderr,spinup_flag\n";
    for (std::size_t i = 0; i < series.years.size(); ++i) {
        s += std::to_string(series.years[i]);
        s += ',';
        s += format_g12(series.tau[i]);
        s += ',';
        if (!std::isnan(series.stderr_[i])) s += format_g12(series.stderr_[i]);
        s += ',';
        s += series.spin_up[i] ? '1' : '0';
        s += '\n';
    }
    write_text_atomic(path, s);
}

TauSeries read_tau_series(const std::string& path) {
    TauSeries out;
    int prev_year = 0;
    bool first = true;
    for (const auto& [line_no, f] :
         read_csv(path, "year,tau,stderr,spinup_flag", 4)) {
        const int year = parse_int(f[0], path, line_no);
        if (!first && year != prev_year + 1)
            parse_fail(path, line_no, "years must be contiguous");
        first = false;
        prev_year = year;
        out.years.push_back(year);
        out.tau.push_back(parse_double(f[1], path, line_no));
        out.stderr_.push_back(
            f[2].empty() ? std::numeric_limits<double>::quiet_NaN()
                         : parse_double(f[2], path, line_no));
        const int flag = parse_int(f[3], path, line_no);
        if (flag != 0 && flag != 1)
            parse_fail(path, line_no, "spinup_flag must be 0 or 1");
        out.spin_up.push_back(flag == 1);
        out.boundary_hit.push_back(false);
        out.non_converged.push_back(false);
    }
    return out;
}

void write_validation(const std::string& path, const ValidationTable& table) {
    std::string s = "year,share_data,share_model,abs_err\n";
    for (std::size_t i = 0; i < table.years.size(); ++i) {
        s += std::to_string(table.years[i]);
        s += ',';
        s += format_g12(table.share_data[i]);
        s += ',';
        s += format_g12(table.share_model[i]);
        s += ',';
        s += format_g12(table.abs_err[i]);
        s += '\n';
    }
    write_text_atomic(path, s);
}

void write_tau_eqm(const std::string& path, const std::vector<EqmRow>& rows) {
    std::string s = "year,tau_eqm,feasible\n";
    for (const auto& r : rows) {
        s += std::to_string(r.year);
        s += ',';
        if (r.feasible) s += format_g12(r.tau);
        s += ',';
        s += r.feasible ? '1' : '0';
        s += '\n';
    }
    write_text_atomic(path, s);
}

void write_snapshot(const std::string& path, const Ensemble& e) {
    std::string s = "agent,wealth\n";
    for (std::size_t i = 0; i < e.wealths.size(); ++i) {
        s += std::to_string(i);
        s += ',';
        s += format_g12(e.wealths[i]);
        s += '\n';
    }
    write_text_atomic(path, s);
}

void write_share_series(const std::string& path,
                        const std::map<int, std::vector<ShareTarget>>& series) {
    std::string s = "year,q,share\n";
    for (const auto& [year, targets] : series) {
        for (const auto& t : targets) {
            s += std::to_string(year);
            s += ',';
            s += format_g12(t.q);
            s += ',';
            s += format_g12(t.share);
            s += '\n';
        }
    }
    write_text_atomic(path, s);
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& el : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (el.key() == a) ok = true;
        if (!ok)
            throw Error(errc::validation,
                        "manifest: unknown field '" + where + el.key() + "'");
    }
}

template <class T>
void take(const json& obj, const char* key, T& slot) {
    if (obj.contains(key)) slot = obj.at(key).get<T>();
}

}  // namespace

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(errc::parse, path + ": " + e.what());
    }
    try {
        reject_unknown(j, "",
                       {"format", "datasets", "output_dir", "q", "calibration"});
        if (!j.contains("format") || j.at("format").get<std::string>() != "rgbm-manifest/1")
            throw Error(errc::validation,
                        "manifest: missing or unsupported format (want "
                        "\"rgbm-manifest/1\")");
        RunManifest m;
        if (j.contains("datasets")) {
            const json& d = j.at("datasets");
            reject_unknown(d, "datasets.", {"shares", "wealth", "closes"});
            take(d, "shares", m.shares_path);
            take(d, "wealth", m.wealth_path);
            take(d, "closes", m.closes_path);
        }
        take(j, "output_dir", m.output_dir);
        take(j, "q", m.q);
        if (j.contains("calibration")) {
            const json& c = j.at("calibration");
            reject_unknown(c, "calibration.",
                           {"n_agents", "n_runs", "master_seed",
                            "substeps_per_year", "spin_up_years",
                            "smoothing_window_years", "tau_bracket", "objective",
                            "tolerance", "mu", "sigma", "default_sigma"});
            auto& cc = m.calibration;
            take(c, "n_agents", cc.n_agents);
            take(c, "n_runs", cc.n_runs);
            take(c, "master_seed", cc.master_seed);
            take(c, "substeps_per_year", cc.substeps_per_year);
            take(c, "spin_up_years", cc.spin_up_years);
            take(c, "smoothing_window_years", cc.smoothing_window_years);
            take(c, "tolerance", cc.tolerance);
            take(c, "default_sigma", cc.default_sigma);
            if (c.contains("tau_bracket")) {
                const json& b = c.at("tau_bracket");
                if (!b.is_array() || b.size() != 2)
                    throw Error(errc::validation,
                                "manifest: tau_bracket must be [low, high]");
                cc.tau_lo = b[0].get<double>();
                cc.tau_hi = b[1].get<double>();
            }
            if (c.contains("objective")) {
                const std::string o = c.at("objective").get<std::string>();
                if (o == "top_share_abs")
                    cc.objective = Discrepancy::TopShareAbs;
                else if (o == "gini_abs")
                    cc.objective = Discrepancy::GiniAbs;
                else if (o == "lorenz_sup")
                    cc.objective = Discrepancy::LorenzSup;
                else if (o == "ks")
                    cc.objective = Discrepancy::KS;
                else
                    throw Error(errc::validation,
                                "manifest: unknown objective '" + o + "'");
            }
            if (c.contains("mu")) cc.mu_override = c.at("mu").get<double>();
            if (c.contains("sigma"))
                cc.sigma_override = c.at("sigma").get<double>();
        }
        if (m.shares_path.empty())
            throw Error(errc::validation, "manifest: datasets.shares is required");
        return m;
    } catch (const json::exception& e) {
        throw Error(errc::validation, path + ": " + e.what());
    }
}

Datasets load_datasets(const RunManifest& m) {
    Datasets d;
    d.share_series = load_share_series(m.shares_path);
    if (!m.wealth_path.empty())
        d.wealth_per_capita = load_wealth_per_capita(m.wealth_path);
    if (!m.closes_path.empty())
        d.daily_closes = load_daily_closes(m.closes_path);
    return d;
}

}  // namespace rgbm
