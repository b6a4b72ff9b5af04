#include "qdm/chirp.hpp"

#include <cmath>
#include <numbers>

#include "qdm/error.hpp"

namespace qdm {

void ChirpParams::validate() const {
  if (!std::isfinite(f_start) || !(f_start > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "chirp start frequency must be positive");
  }
  if (!std::isfinite(amplitude_scale)) {
    throw Error(ErrorCode::InvalidArgument, "chirp amplitude must be finite");
  }
  if (!std::isfinite(t_coalesce) || !std::isfinite(duration) || !(duration > 0.0) ||
      !(duration < t_coalesce)) {
    throw Error(ErrorCode::InvalidArgument, "chirp needs 0 < duration < t_coalesce");
  }
}

double chirp_frequency(double t, const ChirpParams& c) {
  return c.f_start * std::pow(1.0 - t / c.t_coalesce, -0.375);
}

double chirp_phase(double t, const ChirpParams& c) {
  // int_0^t (1 - u/tc)^(-3/8) du = (8/5) tc [1 - (1 - t/tc)^(5/8)]
  return 2.0 * std::numbers::pi * c.f_start * 1.6 * c.t_coalesce *
         (1.0 - std::pow(1.0 - t / c.t_coalesce, 0.625));
}

TimeSeries chirp_signal(const SampleGrid& grid, const ChirpParams& c) {
  c.validate();
  const double t_end = grid.last_time();
  if (t_end >= c.t_coalesce) {
    throw Error(ErrorCode::ChirpDiverged, "time grid reaches the coalescence time");
  }
  if (t_end > c.duration) {
    throw Error(ErrorCode::InvalidArgument, "time grid is longer than the chirp duration");
  }
  Eigen::VectorXd out(grid.size);
  for (Eigen::Index i = 0; i < grid.size; ++i) {
    const double t = double(i) / grid.sample_rate;
    const double envelope = std::pow(chirp_frequency(t, c) / c.f_start, 2.0 / 3.0);
    out[i] = c.amplitude_scale * envelope * std::cos(chirp_phase(t, c));
  }
  return TimeSeries(grid.sample_rate, std::move(out));
}

}  // namespace qdm
