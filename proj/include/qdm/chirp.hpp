#pragma once

#include <Eigen/Core>

#include "qdm/time_series.hpp"

namespace qdm {

/// Newtonian-order inspiral test signal. Instantaneous frequency
///   f(t) = f_start (1 - t / t_coalesce)^(-3/8)
/// with the amplitude growing as (f(t) / f_start)^(2/3).
struct ChirpParams {
  double f_start = 55.0;          // Hz
  double t_coalesce = 5.5;        // s
  double amplitude_scale = 0.1;   // amplitude at t = 0, shot-noise units
  double duration = 5.0;          // s; the signal is truncated here

  void validate() const;
};

double chirp_frequency(double t, const ChirpParams& c);

/// Closed-form 2 pi integral of chirp_frequency from 0 to t.
double chirp_phase(double t, const ChirpParams& c);

/// a(t) cos(phase(t)). Throws ChirpDiverged if the grid reaches t_coalesce
/// and InvalidArgument if it runs past c.duration.
TimeSeries chirp_signal(const SampleGrid& grid, const ChirpParams& c);

}  // namespace qdm
