#include "qdm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qdm/error.hpp"

namespace qdm {

namespace {

Eigen::ArrayXd make_window(Window w, Eigen::Index n) {
  if (w == Window::Rectangular) return Eigen::ArrayXd::Ones(n);
  // periodic Hann
  const Eigen::ArrayXd idx = Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1));
  return 0.5 - 0.5 * (2.0 * std::numbers::pi / double(n) * idx).cos();
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

std::string_view to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

Window parse_window(std::string_view name) {
  if (name == "hann") return Window::Hann;
  if (name == "rectangular") return Window::Rectangular;
  throw Error(ErrorCode::InvalidArgument, "unknown window '" + std::string(name) + "'");
}

Spectrum welch_psd(const TimeSeries& series, Eigen::Index segment_length, double overlap_fraction, Window window) {
  if (segment_length < 4) throw Error(ErrorCode::InvalidArgument, "segment length must be at least 4");
  if (segment_length > series.size()) {
    throw Error(ErrorCode::SegmentTooLong, "segment length exceeds the series length");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9)) {
    throw Error(ErrorCode::InvalidArgument, "overlap fraction must lie in [0, 0.9]");
  }
  const Eigen::Index n = segment_length;
  const Eigen::Index hop = std::max<Eigen::Index>(1, n - Eigen::Index(std::llround(overlap_fraction * double(n))));
  const Eigen::Index bins = n / 2 + 1;
  const Eigen::ArrayXd w = make_window(window, n);
  const double fs = series.sample_rate();
  const double scale = 1.0 / (fs * w.square().sum());

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> segment(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> spectrum;
  Eigen::ArrayXd accum = Eigen::ArrayXd::Zero(bins);
  int count = 0;
  for (Eigen::Index start = 0; start + n <= series.size(); start += hop, ++count) {
    Eigen::Map<Eigen::ArrayXd>(segment.data(), n) = series.samples().segment(start, n).array() * w;
    fft.fwd(spectrum, segment);
    for (Eigen::Index k = 0; k < bins; ++k) accum[k] += std::norm(spectrum[std::size_t(k)]);
  }

  Spectrum out;
  out.psd = (accum * (scale / double(count))).matrix();
  // one-sided: fold negative frequencies onto everything but DC and Nyquist
  const Eigen::Index last_doubled = (n % 2 == 0) ? bins - 2 : bins - 1;
  out.psd.segment(1, last_doubled) *= 2.0;
  out.frequencies = Eigen::VectorXd::LinSpaced(bins, 0.0, double(bins - 1)) * (fs / double(n));
  out.segment_length = n;
  out.overlap_fraction = overlap_fraction;
  out.window = window;
  out.n_averages = count;
  out.sample_rate = fs;
  return out;
}

Spectrum db_rel_shot(const Spectrum& spec, const Spectrum& shot_ref) {
  if (spec.frequencies.size() != shot_ref.frequencies.size() ||
      (spec.frequencies - shot_ref.frequencies).cwiseAbs().maxCoeff() > 1e-9 * spec.frequencies.cwiseAbs().maxCoeff()) {
    throw Error(ErrorCode::GridMismatch, "spectrum and shot reference have different frequency grids");
  }
  if (spec.scale != SpectrumScale::Linear || shot_ref.scale != SpectrumScale::Linear) {
    throw Error(ErrorCode::InvalidArgument, "dB conversion needs linear spectra");
  }
  const Eigen::Index bins = shot_ref.psd.size();
  if (bins < 3) throw Error(ErrorCode::GridMismatch, "shot reference has too few bins");
  const Eigen::VectorXd interior = shot_ref.psd.segment(1, bins - 2);
  if (!(interior.minCoeff() > 0.0)) {
    throw Error(ErrorCode::ZeroReference, "shot reference must be strictly positive");
  }
  const double level = median(std::vector<double>(interior.data(), interior.data() + interior.size()));

  Spectrum out = spec;
  out.psd = (10.0 * (spec.psd.array() / level).max(1e-30).log10()).matrix();
  out.scale = SpectrumScale::DbRelShot;
  return out;
}

double band_level(const Spectrum& spec, double f_lo, double f_hi, std::span<const bool> exclude) {
  if (!(f_lo < f_hi)) throw Error(ErrorCode::EmptyBand, "band needs f_lo < f_hi");
  if (!exclude.empty() && Eigen::Index(exclude.size()) != spec.frequencies.size()) {
    throw Error(ErrorCode::GridMismatch, "exclusion mask length differs from the spectrum");
  }
  std::vector<double> values;
  for (Eigen::Index k = 0; k < spec.frequencies.size(); ++k) {
    const double f = spec.frequencies[k];
    if (f < f_lo || f > f_hi) continue;
    if (!exclude.empty() && exclude[std::size_t(k)]) continue;
    values.push_back(spec.psd[k]);
  }
  if (values.size() < 5) throw Error(ErrorCode::EmptyBand, "band holds fewer than 5 usable bins");
  return median(std::move(values));
}

MatchedFilterPeak matched_filter_peak(const TimeSeries& residual, const TimeSeries& template_series,
                                      Eigen::Index exclusion) {
  if (residual.sample_rate() != template_series.sample_rate()) {
    throw Error(ErrorCode::IncompatibleGrids, "template and residual sample rates differ");
  }
  if (template_series.size() > residual.size()) {
    throw Error(ErrorCode::InvalidArgument, "template is longer than the residual");
  }
  const double energy = template_series.samples().squaredNorm();
  if (!(energy > 0.0)) throw Error(ErrorCode::ZeroTemplate, "template has zero energy");

  const Eigen::Index n = residual.size();
  std::vector<double> data(residual.samples().data(), residual.samples().data() + n);
  std::vector<double> tmpl(static_cast<std::size_t>(n), 0.0);
  Eigen::Map<Eigen::VectorXd>(tmpl.data(), template_series.size()) = template_series.samples() / std::sqrt(energy);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> data_f;
  std::vector<std::complex<double>> tmpl_f;
  fft.fwd(data_f, data);
  fft.fwd(tmpl_f, tmpl);
  for (std::size_t k = 0; k < data_f.size(); ++k) data_f[k] *= std::conj(tmpl_f[k]);
  std::vector<double> corr;
  fft.inv(corr, data_f);
  const Eigen::Map<const Eigen::ArrayXd> c(corr.data(), n);

  Eigen::Index peak = 0;
  c.abs().maxCoeff(&peak);
  if (exclusion < 0) exclusion = std::max<Eigen::Index>(1, n / 100);
  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const Eigen::Index d = std::abs(l - peak);
    if (std::min(d, n - d) <= exclusion) continue;
    sum += c[l];
    sum_sq += c[l] * c[l];
    ++used;
  }
  if (used < 2) throw Error(ErrorCode::InvalidArgument, "exclusion window leaves no off-peak lags");
  const double mean = sum / double(used);
  const double spread = std::sqrt(std::max(0.0, sum_sq / double(used) - mean * mean));

  MatchedFilterPeak out;
  out.value = c[peak];
  out.snr = spread > 0.0 ? std::abs(c[peak]) / spread : std::numeric_limits<double>::infinity();
  const Eigen::Index signed_lag = peak <= n / 2 ? peak : peak - n;
  out.lag = double(signed_lag) / residual.sample_rate();
  return out;
}

}  // namespace qdm
