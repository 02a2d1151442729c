#pragma once

#include <map>
#include <string>
#include <vector>

#include "rgbm/calibration.hpp"
#include "rgbm/ensemble.hpp"
#include "rgbm/inequality.hpp"

namespace rgbm {

// 12 significant digits, locale-independent; the one number format every
// output file uses, so golden files are platform-stable.
std::string format_g12(double v);

// Writes via a temp file in the same directory plus rename, so an interrupted
// run never leaves a partial file at the final path.
void write_text_atomic(const std::string& path, const std::string& content);

// shares.csv: header `year,q,share`.
std::map<int, std::vector<ShareTarget>> load_share_series(const std::string& path);
// wealth_per_capita.csv: header `year,value`.
std::map<int, double> load_wealth_per_capita(const std::string& path);
// closes.csv: header `date,close`, ISO dates, positive closes.
std::map<std::string, double> load_daily_closes(const std::string& path);

// tau tables: header `year,tau,stderr,spinup_flag`; missing stderr is an
// empty field, never 0.
void write_tau_series(const std::string& path, const TauSeries& series);
TauSeries read_tau_series(const std::string& path);

// validation.csv: header `year,share_data,share_model,abs_err`.
void write_validation(const std::string& path, const ValidationTable& table);

// tau_eqm.csv: header `year,tau_eqm,feasible`; infeasible years keep the
// value field empty.
struct EqmRow {
    int year = 0;
    double tau = 0.0;
    bool feasible = false;
};
void write_tau_eqm(const std::string& path, const std::vector<EqmRow>& rows);

// Ensemble snapshot: header `agent,wealth`.
void write_snapshot(const std::string& path, const Ensemble& e);

// Share series in the input format, for synthetic data generation.
void write_share_series(const std::string& path,
                        const std::map<int, std::vector<ShareTarget>>& series);

// Run manifest: strict JSON, version "rgbm-manifest/1", unknown fields
// rejected by name. Payload beyond CalibrationConfig: dataset paths, the
// output directory, and the target q.
struct RunManifest {
    std::string shares_path;
    std::string wealth_path;   // optional, empty when absent
    std::string closes_path;   // optional, empty when absent
    std::string output_dir = ".";
    double q = 0.1;
    CalibrationConfig calibration;
};

RunManifest load_manifest(const std::string& path);

Datasets load_datasets(const RunManifest& m);

}  // namespace rgbm
