#include "qdm/time_series.hpp"

#include <cmath>
#include <utility>

#include "qdm/error.hpp"

namespace qdm {

TimeSeries::TimeSeries(double sample_rate, Eigen::VectorXd samples, std::string unit)
    : sample_rate_(sample_rate), samples_(std::move(samples)), unit_(std::move(unit)) {
  if (!std::isfinite(sample_rate_) || !(sample_rate_ > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  if (samples_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "time series needs at least 2 samples");
  }
  if (!samples_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "time series contains non-finite samples");
  }
}

SampleGrid make_grid(double sample_rate, double duration) {
  if (!std::isfinite(sample_rate) || !(sample_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  if (!std::isfinite(duration) || !(duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration must be positive");
  }
  const auto n = static_cast<Eigen::Index>(std::llround(sample_rate * duration));
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 samples");
  return {sample_rate, n};
}

Eigen::ArrayXd TimeSeries::times() const { return time_grid(sample_rate_, samples_.size()); }

double TimeSeries::rms() const { return std::sqrt(samples_.squaredNorm() / double(samples_.size())); }

double TimeSeries::variance() const {
  const double mean = samples_.mean();
  return (samples_.array() - mean).square().sum() / double(samples_.size() - 1);
}

bool TimeSeries::compatible_with(const TimeSeries& other) const {
  return sample_rate_ == other.sample_rate_ && samples_.size() == other.samples_.size();
}

TimeSeries TimeSeries::operator+(const TimeSeries& other) const {
  require_compatible(*this, other);
  return TimeSeries(sample_rate_, samples_ + other.samples_, unit_);
}

TimeSeries TimeSeries::operator-(const TimeSeries& other) const {
  require_compatible(*this, other);
  return TimeSeries(sample_rate_, samples_ - other.samples_, unit_);
}

Eigen::ArrayXd time_grid(double sample_rate, Eigen::Index n) {
  return Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1)) / sample_rate;
}

void require_compatible(const TimeSeries& a, const TimeSeries& b) {
  if (!a.compatible_with(b)) {
    throw Error(ErrorCode::IncompatibleGrids, "time series differ in sample rate or length");
  }
}

}  // namespace qdm
