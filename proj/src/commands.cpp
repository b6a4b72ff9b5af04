#include "qdm/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>

#include "qdm/dataset_io.hpp"
#include "qdm/error.hpp"
#include "qdm/spectral.hpp"

namespace qdm {

namespace fs = std::filesystem;

namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void put_scatter(KeyValueFile& kv, const ScatterParams& p) {
  kv.set("scatter.amplitude", format_exact(p.amplitude));
  kv.set("scatter.phi0", format_exact(p.phi0));
  kv.set("scatter.f", format_exact(p.frequency));
  kv.set("scatter.lambda", format_exact(p.wavelength));
  for (int n = 0; n < kScatterOrders; ++n) kv.set("scatter.m" + std::to_string(n + 1), format_exact(p.depth[n]));
  for (int n = 0; n < kScatterOrders; ++n) kv.set("scatter.phi" + std::to_string(n + 1), format_exact(p.phase[n]));
  kv.set("scatter.a_prime", format_exact(p.a_prime));
  kv.set("scatter.delta_phi", format_exact(p.delta_phi));
}

const TimeSeries& channel_of(const Dataset& d, const std::string& channel) {
  if (channel == "bhd1") return d.bhd1;
  if (channel == "bhd2") return d.bhd2;
  throw Error(ErrorCode::InvalidArgument, "channel must be bhd1 or bhd2, got '" + channel + "'");
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Parse:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyGrid:
      return 1;
    case ErrorCode::Io:
      return 3;
    default:
      return 2;
  }
}

void write_budget_csv(std::ostream& out, const BudgetGrid& grid) {
  out << "squeezing_db";
  for (Eigen::Index j = 0; j < grid.eta_values.size(); ++j) out << ",eta_" << format_general(grid.eta_values[j], 6);
  out << '\n';
  const Eigen::VectorXd db = grid.squeezing_db();
  for (Eigen::Index i = 0; i < grid.r_values.size(); ++i) {
    out << format_general(db[i], 6);
    for (Eigen::Index j = 0; j < grid.eta_values.size(); ++j) out << ',' << format_general(grid.factors(i, j), 6);
    out << '\n';
  }
}

BudgetReport cmd_budget(const BudgetRequest& req, const fs::path& out_path, std::ostream& log) {
  if (req.db_min < 0.0) throw Error(ErrorCode::InvalidArgument, "squeezing range must start at >= 0 dB");
  if (req.eta_min <= 0.0 || req.eta_max > 1.0) throw Error(ErrorCode::InvalidArgument, "eta range must lie in (0, 1]");
  std::vector<double> r_list;
  for (double db : linear_range(req.db_min, req.db_max, req.db_step)) r_list.push_back(NoiseSpec::db_to_r(db));
  const std::vector<double> eta_list = linear_range(req.eta_min, req.eta_max, req.eta_step);

  BudgetReport rep;
  rep.grid = budget_sweep(r_list, eta_list);
  Eigen::Index bi = 0;
  Eigen::Index bj = 0;
  rep.min_factor = rep.grid.factors.minCoeff(&bi, &bj);
  rep.min_db = rep.grid.squeezing_db()[bi];
  rep.min_eta = rep.grid.eta_values[bj];

  if (out_path.has_parent_path()) ensure_directory(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + out_path.string());
  write_budget_csv(out, rep.grid);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + out_path.string());

  log << "reduction factor at " << format_general(rep.grid.squeezing_db()[0], 6) << " dB:";
  for (Eigen::Index j = 0; j < rep.grid.eta_values.size(); ++j) log << ' ' << fixed6(rep.grid.factors(0, j));
  log << '\n';
  log << "minimum factor " << fixed6(rep.min_factor) << " at " << format_general(rep.min_db, 6) << " dB, eta "
      << format_general(rep.min_eta, 6) << '\n';
  log << "cells above 2: " << rep.grid.above_two().count() << " of " << rep.grid.factors.size() << '\n';
  return rep;
}

SimulateReport cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  const SimulatedRecord rec = assemble_dataset(cfg.sim);
  ensure_directory(out_dir);
  SimulateReport rep;
  rep.dataset = out_dir / "dataset.csv";
  rep.shot_reference = out_dir / "shot_reference.csv";
  rep.metadata = out_dir / "dataset.meta";
  rep.rows = rec.data.bhd1.size();
  write_dataset_csv(rep.dataset, rec.data);
  write_dataset_csv(rep.shot_reference, rec.shot);
  // readable back as a config
  write_key_values(rep.metadata, to_key_values(cfg), "generation parameters");
  return rep;
}

KeyValueFile fit_report(const RecoveryResult& rec) {
  KeyValueFile kv;
  kv.set("status", rec.pass_through ? "pass-through" : "subtracted");
  kv.set("note", rec.note);
  if (rec.fit) {
    put_scatter(kv, rec.fit->params);
    kv.set("residual_rms", format_exact(rec.fit->residual_rms));
    kv.set("converged", rec.fit->converged ? "true" : "false");
    kv.set("restarts_used", std::to_string(rec.fit->restarts_used));
    kv.set("iterations", std::to_string(rec.fit->iterations));
    kv.set("cost", format_exact(rec.fit->cost));
  }
  return kv;
}

RecoveryResult cmd_fit(const fs::path& dataset, const RunConfig& cfg, const fs::path& out_dir) {
  const Dataset data = read_dataset_csv(dataset);
  RecoveryResult rec = run_recovery(data, cfg.fit);
  ensure_directory(out_dir);
  write_key_values(out_dir / "fit_report.txt", fit_report(rec), "scatter fit");
  write_dataset_csv(out_dir / "cleaned.csv", Dataset{data.bhd1, rec.cleaned});
  return rec;
}

std::vector<fs::path> cmd_psd(const fs::path& dataset, const std::string& channel, const std::optional<fs::path>& shot,
                              const RunConfig& cfg, const fs::path& out_dir) {
  const Dataset data = read_dataset_csv(dataset);
  const Spectrum spec = welch_psd(channel_of(data, channel), cfg.spectral);
  std::optional<Spectrum> db;
  if (shot) {
    const Dataset ref = read_dataset_csv(*shot);
    db = db_rel_shot(spec, welch_psd(channel_of(ref, channel), cfg.spectral));
  }
  ensure_directory(out_dir);
  const std::string stem = dataset.stem().string() + "_" + channel;
  std::vector<fs::path> written{out_dir / ("psd_" + stem + ".csv"), out_dir / ("psd_" + stem + ".meta")};
  write_spectrum_csv(written[0], spec);
  write_key_values(written[1], spectrum_metadata(spec), "spectrum estimator");
  if (db) {
    written.push_back(out_dir / ("db_" + stem + ".csv"));
    write_spectrum_csv(written.back(), *db);
  }
  return written;
}

std::vector<bool> chirp_dominated_bins(const RunConfig& cfg) {
  const SampleGrid grid = cfg.sim.grid();
  const Spectrum chirp = welch_psd(chirp_signal(grid, cfg.sim.chirp), cfg.spectral);
  const double noise_level = cfg.sim.noise.bhd2_variance() / (0.5 * grid.sample_rate);
  std::vector<bool> mask(std::size_t(chirp.psd.size()));
  for (Eigen::Index k = 0; k < chirp.psd.size(); ++k) mask[std::size_t(k)] = chirp.psd[k] > 0.1 * noise_level;
  return mask;
}

KeyValueFile PipelineSummary::to_key_values() const {
  KeyValueFile kv;
  kv.set("status", status);
  kv.set("note", note);
  kv.set("fit.converged", converged ? "true" : "false");
  kv.set("level.bhd1_original.high_band_db", format_general(bhd1_original_high_db, 6));
  kv.set("level.bhd2_original.low_band_db", format_general(bhd2_original_low_db, 6));
  kv.set("level.bhd2_original.high_band_db", format_general(bhd2_original_high_db, 6));
  kv.set("level.bhd2_cleaned.low_band_db", format_general(bhd2_cleaned_low_db, 6));
  kv.set("level.bhd2_cleaned.high_band_db", format_general(bhd2_cleaned_high_db, 6));
  kv.set("level.bhd2_reference.low_band_db", format_general(bhd2_reference_low_db, 6));
  kv.set("level.bhd2_reference.high_band_db", format_general(bhd2_reference_high_db, 6));
  auto opt = [](const std::optional<double>& v) { return v ? format_general(*v, 6) : std::string("n/a"); };
  kv.set("matched_filter.snr_original", opt(snr_original));
  kv.set("matched_filter.snr_cleaned", opt(snr_cleaned));
  kv.set("matched_filter.snr_reference", opt(snr_reference));
  return kv;
}

PipelineSummary cmd_pipeline(const RunConfig& cfg, const fs::path& out_dir) {
  PipelineSummary sum;
  const SimulateReport sim = cmd_simulate(cfg, out_dir);

  // disturbance-free reference with the same noise seed
  RunConfig quiet = cfg;
  quiet.sim.scatter.amplitude = 0.0;
  quiet.sim.scatter.a_prime = 0.0;
  write_dataset_csv(out_dir / "reference.csv", assemble_dataset(quiet.sim).data);

  try {
    const RecoveryResult rec = cmd_fit(sim.dataset, cfg, out_dir);
    const Dataset data = read_dataset_csv(sim.dataset);
    const Dataset shot = read_dataset_csv(sim.shot_reference);
    const Dataset reference = read_dataset_csv(out_dir / "reference.csv");

    sum.status = rec.pass_through ? "pass-through" : "subtracted";
    sum.note = rec.note;
    sum.converged = rec.fit && rec.fit->converged;

    const WelchSettings& ws = cfg.spectral;
    const Spectrum shot1 = welch_psd(shot.bhd1, ws);
    const Spectrum shot2 = welch_psd(shot.bhd2, ws);
    const Spectrum orig1 = welch_psd(data.bhd1, ws);
    const Spectrum orig2 = welch_psd(data.bhd2, ws);
    const Spectrum clean2 = welch_psd(rec.cleaned, ws);
    const Spectrum ref2 = welch_psd(reference.bhd2, ws);

    const std::pair<const char*, const Spectrum*> linear[] = {
        {"psd_bhd1_original", &orig1}, {"psd_bhd2_original", &orig2}, {"psd_bhd2_cleaned", &clean2},
        {"psd_bhd2_reference", &ref2}, {"psd_shot_bhd1", &shot1},     {"psd_shot_bhd2", &shot2}};
    for (const auto& [name, spec] : linear) write_spectrum_csv(out_dir / (std::string(name) + ".csv"), *spec);

    const Spectrum db1 = db_rel_shot(orig1, shot1);
    const Spectrum db2 = db_rel_shot(orig2, shot2);
    const Spectrum db_clean = db_rel_shot(clean2, shot2);
    const Spectrum db_ref = db_rel_shot(ref2, shot2);
    write_spectrum_csv(out_dir / "db_bhd1_original.csv", db1);
    write_spectrum_csv(out_dir / "db_bhd2_original.csv", db2);
    write_spectrum_csv(out_dir / "db_bhd2_cleaned.csv", db_clean);
    write_spectrum_csv(out_dir / "db_bhd2_reference.csv", db_ref);
    write_key_values(out_dir / "spectra.meta", spectrum_metadata(orig1), "spectrum estimator");

    const std::vector<bool> chirp_bins = chirp_dominated_bins(cfg);
    const auto mask = std::make_unique<bool[]>(chirp_bins.size());
    std::copy(chirp_bins.begin(), chirp_bins.end(), mask.get());
    const std::span<const bool> exclude(mask.get(), chirp_bins.size());

    sum.bhd1_original_high_db = band_level(db1, cfg.high_band_lo, cfg.high_band_hi);
    sum.bhd2_original_low_db = band_level(db2, cfg.low_band_lo, cfg.low_band_hi);
    sum.bhd2_original_high_db = band_level(db2, cfg.high_band_lo, cfg.high_band_hi);
    sum.bhd2_cleaned_low_db = band_level(db_clean, cfg.low_band_lo, cfg.low_band_hi, exclude);
    sum.bhd2_cleaned_high_db = band_level(db_clean, cfg.high_band_lo, cfg.high_band_hi);
    sum.bhd2_reference_low_db = band_level(db_ref, cfg.low_band_lo, cfg.low_band_hi, exclude);
    sum.bhd2_reference_high_db = band_level(db_ref, cfg.high_band_lo, cfg.high_band_hi);

    if (cfg.sim.chirp.amplitude_scale != 0.0) {
      const TimeSeries tmpl = chirp_signal(cfg.sim.grid(), cfg.sim.chirp);
      sum.snr_original = matched_filter_peak(data.bhd2, tmpl).snr;
      sum.snr_cleaned = matched_filter_peak(rec.cleaned, tmpl).snr;
      sum.snr_reference = matched_filter_peak(reference.bhd2, tmpl).snr;
    }
  } catch (const Error& e) {
    sum.status = "error";
    sum.note = e.what();
    write_key_values(out_dir / "summary.txt", sum.to_key_values(), "pipeline summary (incomplete)");
    throw;
  }
  write_key_values(out_dir / "summary.txt", sum.to_key_values(), "pipeline summary");
  return sum;
}

}  // namespace qdm
