#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdm/kv_file.hpp"
#include "qdm/noise_budget.hpp"
#include "qdm/run_config.hpp"
#include "qdm/scatter_fit.hpp"

namespace qdm {

/// Process exit status for an error class: 1 validation, 2 runtime, 3 I/O.
int exit_code_for(ErrorCode code);

struct BudgetRequest {
  double db_min = 0.0;
  double db_max = 15.0;
  double db_step = 0.5;
  double eta_min = 0.5;
  double eta_max = 1.0;
  double eta_step = 0.01;
};

struct BudgetReport {
  BudgetGrid grid;
  double min_factor = 0.0;
  double min_db = 0.0;
  double min_eta = 0.0;
};

/// Grid CSV: header `squeezing_db,eta_<value>,...`, 6 significant digits.
void write_budget_csv(std::ostream& out, const BudgetGrid& grid);

/// Sweeps, writes the CSV to out_path and prints the r = 0 row and the minimum.
BudgetReport cmd_budget(const BudgetRequest& req, const std::filesystem::path& out_path, std::ostream& log);

struct SimulateReport {
  std::filesystem::path dataset;
  std::filesystem::path shot_reference;
  std::filesystem::path metadata;
  Eigen::Index rows = 0;
};

/// dataset.csv, shot_reference.csv and dataset.meta in out_dir.
SimulateReport cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Fit report as `key = value` pairs (scatter.* keys match the config).
KeyValueFile fit_report(const RecoveryResult& rec);

/// Loads a dataset CSV, runs recovery, writes fit_report.txt and cleaned.csv.
RecoveryResult cmd_fit(const std::filesystem::path& dataset, const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Spectrum of one channel (`bhd1` or `bhd2`) of a dataset CSV; with a shot
/// reference file the dB-relative spectrum is written as well.
std::vector<std::filesystem::path> cmd_psd(const std::filesystem::path& dataset, const std::string& channel,
                                           const std::optional<std::filesystem::path>& shot, const RunConfig& cfg,
                                           const std::filesystem::path& out_dir);

/// Bins where the injected chirp carries more than a tenth of the expected
/// BHD2 noise power per bin.
std::vector<bool> chirp_dominated_bins(const RunConfig& cfg);

struct PipelineSummary {
  std::string status;             // "subtracted", "pass-through" or "error"
  std::string note;
  bool converged = false;
  double bhd1_original_high_db = 0.0;
  double bhd2_original_low_db = 0.0;
  double bhd2_original_high_db = 0.0;
  double bhd2_cleaned_low_db = 0.0;   // chirp-dominated bins excluded
  double bhd2_cleaned_high_db = 0.0;
  double bhd2_reference_low_db = 0.0;
  double bhd2_reference_high_db = 0.0;
  std::optional<double> snr_original;
  std::optional<double> snr_cleaned;
  std::optional<double> snr_reference;

  KeyValueFile to_key_values() const;
};

/// simulate -> fit -> subtract -> spectra, all files in out_dir. The fit runs
/// on the dataset as read back from its CSV so it matches `fit` exactly.
PipelineSummary cmd_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace qdm
