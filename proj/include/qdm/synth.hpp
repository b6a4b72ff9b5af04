#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "qdm/chirp.hpp"
#include "qdm/noise_budget.hpp"
#include "qdm/scatter_model.hpp"
#include "qdm/time_series.hpp"

namespace qdm {

/// Readout noise for both detectors. Each detector's white noise has the
/// variance qdm_variance_bhd2 of its own NoiseSpec.
struct DetectorNoiseSpec {
  NoiseSpec bhd1 = NoiseSpec::from_db(5.0, 1.0);
  NoiseSpec bhd2 = NoiseSpec::from_db(5.0, 1.0);
  std::uint64_t seed = 20161026;

  double bhd1_variance() const { return qdm_variance_bhd2(bhd1); }
  double bhd2_variance() const { return qdm_variance_bhd2(bhd2); }
};

/// Independent noise streams derived from one seed.
enum class NoiseStream : std::uint32_t { Bhd1 = 0, Bhd2 = 1, ShotBhd1 = 2, ShotBhd2 = 3 };

/// Unit-variance white Gaussian samples for (seed, stream).
Eigen::VectorXd white_noise(const SampleGrid& grid, std::uint64_t seed, NoiseStream stream);

struct Dataset {
  TimeSeries bhd1;
  TimeSeries bhd2;
};

Dataset squeezed_noise(const SampleGrid& grid, const DetectorNoiseSpec& d);

/// Vacuum-noise pair (r = 0, eta = 1) standing in for the blocked-port
/// measurement. Uses streams separate from squeezed_noise.
Dataset shot_reference(const SampleGrid& grid, std::uint64_t seed);

struct SimulationInputs {
  ChirpParams chirp;
  ScatterParams scatter;
  DetectorNoiseSpec noise;
  double marker_amplitude = 1.0;
  double marker_frequency = 1000.0;
  double sample_rate = 16384.0;
  double duration = 5.0;

  SampleGrid grid() const { return make_grid(sample_rate, duration); }
  /// Highest frequency any enabled component reaches, Hz.
  double highest_frequency() const;
};

/// Every additive component of the two channels, generated independently.
struct DatasetComponents {
  Eigen::VectorXd scatter_bhd1;
  Eigen::VectorXd scatter_bhd2;
  Eigen::VectorXd marker;
  Eigen::VectorXd chirp;
  Eigen::VectorXd noise_bhd1;
  Eigen::VectorXd noise_bhd2;
};

DatasetComponents generate_components(const SimulationInputs& in);

struct SimulatedRecord {
  Dataset data;
  Dataset shot;
};

/// BHD1 = scatter + marker + noise, BHD2 = scatter + chirp + noise, summed
/// in that order; plus the shot-reference pair.
/// Throws NyquistViolation if sample_rate < 4 x highest_frequency().
SimulatedRecord assemble_dataset(const SimulationInputs& in);

}  // namespace qdm
