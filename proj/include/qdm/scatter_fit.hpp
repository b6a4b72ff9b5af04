#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qdm/scatter_model.hpp"
#include "qdm/synth.hpp"
#include "qdm/time_series.hpp"

namespace qdm {

struct FitConfig {
  double f_seed = 5.0;             // Hz
  int max_iterations = 500;
  double cost_tolerance = 1e-10;
  double param_tolerance = 1e-8;
  int multistart_count = 4;
  double damping_init = 1e-3;
  bool fix_f = false;              // keep f at f_seed instead of fitting it
  double wavelength = 1064e-9;     // m; converts fitted phase depths to metres
  double max_depth = 8.0;          // largest first-order depth searched, in wavelengths
  double detection_snr = 10.0;     // minimum matched-filter SNR of the fitted disturbance

  void validate() const;
};

struct FitResult {
  ScatterParams params;            // a_prime = amplitude, delta_phi = 0 until projected
  PhaseHarmonics harmonics;        // same phase in harmonic form
  double residual_rms = 0.0;
  double cost = 0.0;
  std::vector<double> cost_history;
  bool converged = false;
  int restarts_used = 0;
  int iterations = 0;
};

/// Modulation frequency maximizing the self-similarity of the series under
/// a lag of one period, searched within +-10% of f_seed.
double estimate_modulation_frequency(const TimeSeries& series, double f_seed);

/// Least-squares fit of A cos phi(t) to the phase-quadrature channel.
/// Throws InsufficientData for records shorter than 3 periods of f_seed and
/// DegenerateAmplitude when no disturbance is detectable. Non-convergence is
/// reported through FitResult::converged.
FitResult fit_bhd1(const TimeSeries& series, const FitConfig& cfg);

struct Projection {
  double a_prime = 0.0;
  double delta_phi = 0.0;
};

/// Closed-form fit of A' sin(phi + delta_phi) to the amplitude-quadrature
/// channel for a known phase trajectory. Throws SingularDesign when sin phi
/// and cos phi are collinear.
Projection fit_bhd2_projection(const TimeSeries& series, const Eigen::ArrayXd& phi_trajectory);

/// series - A' sin(phi(t) + delta_phi).
TimeSeries subtract_disturbance(const TimeSeries& series, const ScatterParams& params);

struct RecoveryResult {
  std::optional<FitResult> fit;    // empty on pass-through
  TimeSeries cleaned;
  bool pass_through = false;
  std::string note;
};

/// fit_bhd1 -> fit_bhd2_projection -> subtract_disturbance. The sign of phi
/// is not observable in BHD1; it is fixed here so that |delta_phi| <= pi/2.
RecoveryResult run_recovery(const Dataset& data, const FitConfig& cfg);

}  // namespace qdm
