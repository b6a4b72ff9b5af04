#pragma once

#include <string>

#include <Eigen/Core>

namespace qdm {

/// Sample rate and sample count of a uniform grid starting at t = 0.
struct SampleGrid {
  double sample_rate;
  Eigen::Index size;

  double duration() const { return double(size) / sample_rate; }
  /// Time of the last sample.
  double last_time() const { return double(size - 1) / sample_rate; }
};

SampleGrid make_grid(double sample_rate, double duration);

/// Uniformly sampled real channel. Sample i sits at t = i / sample_rate.
class TimeSeries {
 public:
  TimeSeries(double sample_rate, Eigen::VectorXd samples, std::string unit = "shot");

  double sample_rate() const { return sample_rate_; }
  const Eigen::VectorXd& samples() const { return samples_; }
  const std::string& unit() const { return unit_; }
  Eigen::Index size() const { return samples_.size(); }
  double duration() const { return double(samples_.size()) / sample_rate_; }
  double operator[](Eigen::Index i) const { return samples_[i]; }

  SampleGrid grid() const { return {sample_rate_, samples_.size()}; }
  Eigen::ArrayXd times() const;
  double rms() const;
  double variance() const;

  bool compatible_with(const TimeSeries& other) const;

  /// Elementwise sum; throws IncompatibleGrids on rate/length mismatch.
  TimeSeries operator+(const TimeSeries& other) const;
  TimeSeries operator-(const TimeSeries& other) const;

 private:
  double sample_rate_;
  Eigen::VectorXd samples_;
  std::string unit_;
};

/// Sample times for n samples at sample_rate.
Eigen::ArrayXd time_grid(double sample_rate, Eigen::Index n);
inline Eigen::ArrayXd time_grid(const SampleGrid& grid) { return time_grid(grid.sample_rate, grid.size); }

void require_compatible(const TimeSeries& a, const TimeSeries& b);

}  // namespace qdm
