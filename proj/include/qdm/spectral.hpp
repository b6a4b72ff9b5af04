#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "qdm/time_series.hpp"

namespace qdm {

enum class Window { Hann, Rectangular };
enum class SpectrumScale { Linear, DbRelShot };

std::string_view to_string(Window w);
/// Accepts "hann" and "rectangular"; throws InvalidArgument otherwise.
Window parse_window(std::string_view name);

/// One-sided averaged periodogram.
struct Spectrum {
  Eigen::VectorXd frequencies;  // Hz, DC to Nyquist
  Eigen::VectorXd psd;          // power per Hz, or dB re shot
  Eigen::Index segment_length = 0;
  double overlap_fraction = 0.0;
  Window window = Window::Hann;
  int n_averages = 0;
  double sample_rate = 0.0;
  SpectrumScale scale = SpectrumScale::Linear;

  double resolution() const { return sample_rate / double(segment_length); }
};

struct WelchSettings {
  Eigen::Index segment_length = 4096;
  double overlap_fraction = 0.5;
  Window window = Window::Hann;
};

/// Welch estimate normalized so white noise of variance s^2 gives a flat
/// s^2 / (fs / 2). Throws SegmentTooLong and InvalidArgument.
Spectrum welch_psd(const TimeSeries& series, Eigen::Index segment_length, double overlap_fraction,
                   Window window = Window::Hann);
inline Spectrum welch_psd(const TimeSeries& series, const WelchSettings& s) {
  return welch_psd(series, s.segment_length, s.overlap_fraction, s.window);
}

/// 10 log10(psd / median(shot_ref)), the median taken over all bins except
/// DC and Nyquist. Throws GridMismatch and ZeroReference.
Spectrum db_rel_shot(const Spectrum& spec, const Spectrum& shot_ref);

/// Median of the spectrum values with f_lo <= f <= f_hi, skipping bins whose
/// exclude flag is set. Throws EmptyBand for fewer than 5 usable bins.
double band_level(const Spectrum& spec, double f_lo, double f_hi, std::span<const bool> exclude = {});

struct MatchedFilterPeak {
  double snr = 0.0;    // |peak| over the off-peak standard deviation
  double lag = 0.0;    // s; positive when the template sits later in the data
  double value = 0.0;  // correlation with the unit-energy template at the peak
};

/// Circular cross-correlation of residual with the unit-energy template over
/// every lag. Correlations within exclusion samples of the peak are left out
/// of the spread estimate; a negative exclusion means 1% of the length.
MatchedFilterPeak matched_filter_peak(const TimeSeries& residual, const TimeSeries& template_series,
                                      Eigen::Index exclusion = -1);

}  // namespace qdm
