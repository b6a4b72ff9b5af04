#include "qdm/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qdm/error.hpp"

namespace qdm {

Eigen::VectorXd white_noise(const SampleGrid& grid, std::uint64_t seed, NoiseStream stream) {
  std::seed_seq seq{std::uint32_t(seed & 0xffffffffu), std::uint32_t(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(grid.size);
  for (Eigen::Index i = 0; i < grid.size; ++i) out[i] = normal(rng);
  return out;
}

Dataset squeezed_noise(const SampleGrid& grid, const DetectorNoiseSpec& d) {
  return {TimeSeries(grid.sample_rate, std::sqrt(d.bhd1_variance()) * white_noise(grid, d.seed, NoiseStream::Bhd1)),
          TimeSeries(grid.sample_rate, std::sqrt(d.bhd2_variance()) * white_noise(grid, d.seed, NoiseStream::Bhd2))};
}

Dataset shot_reference(const SampleGrid& grid, std::uint64_t seed) {
  return {TimeSeries(grid.sample_rate, white_noise(grid, seed, NoiseStream::ShotBhd1)),
          TimeSeries(grid.sample_rate, white_noise(grid, seed, NoiseStream::ShotBhd2))};
}

double SimulationInputs::highest_frequency() const {
  double highest = 0.0;
  if (marker_amplitude != 0.0) highest = std::max(highest, marker_frequency);
  if (chirp.amplitude_scale != 0.0) {
    highest = std::max(highest, chirp_frequency(std::min(duration, chirp.duration), chirp));
  }
  if (scatter.amplitude != 0.0 || scatter.a_prime != 0.0) {
    // peak instantaneous frequency f * sum_n n k_n plus the carrier
    double rate = 0.0;
    for (int n = 1; n <= kScatterOrders; ++n) rate += n * std::abs(scatter.depth_rad(n));
    highest = std::max(highest, scatter.frequency * (rate + 1.0));
  }
  return highest;
}

DatasetComponents generate_components(const SimulationInputs& in) {
  const SampleGrid grid = in.grid();
  in.scatter.validate();
  in.chirp.validate();
  if (!std::isfinite(in.marker_amplitude) || !std::isfinite(in.marker_frequency) || in.marker_frequency < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "marker amplitude and frequency must be finite");
  }
  const double highest = in.highest_frequency();
  if (in.sample_rate < 4.0 * highest) {
    std::ostringstream msg;
    msg << "sample rate " << in.sample_rate << " Hz is below 4x the highest signal frequency " << highest << " Hz";
    throw Error(ErrorCode::NyquistViolation, msg.str());
  }

  DatasetComponents c;
  std::tie(c.scatter_bhd1, c.scatter_bhd2) = scatter_channels(grid, in.scatter);
  const Eigen::ArrayXd t = time_grid(grid);
  c.marker = (in.marker_amplitude * (2.0 * std::numbers::pi * in.marker_frequency * t).sin()).matrix();
  c.chirp = chirp_signal(grid, in.chirp).samples();
  Dataset noise = squeezed_noise(grid, in.noise);
  c.noise_bhd1 = noise.bhd1.samples();
  c.noise_bhd2 = noise.bhd2.samples();
  return c;
}

SimulatedRecord assemble_dataset(const SimulationInputs& in) {
  const DatasetComponents c = generate_components(in);
  const SampleGrid grid = in.grid();
  Eigen::VectorXd bhd1 = c.scatter_bhd1;
  bhd1 += c.marker;
  bhd1 += c.noise_bhd1;
  Eigen::VectorXd bhd2 = c.scatter_bhd2;
  bhd2 += c.chirp;
  bhd2 += c.noise_bhd2;
  return {{TimeSeries(grid.sample_rate, std::move(bhd1)), TimeSeries(grid.sample_rate, std::move(bhd2))},
          shot_reference(grid, in.noise.seed)};
}

}  // namespace qdm
