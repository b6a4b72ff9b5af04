#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "qdm/chirp.hpp"
#include "qdm/error.hpp"
#include "qdm/spectral.hpp"
#include "qdm/synth.hpp"

using std::numbers::pi;

namespace {

qdm::TimeSeries noise(double fs, double seconds, std::uint64_t seed, double sigma = 1.0) {
  const qdm::SampleGrid g = qdm::make_grid(fs, seconds);
  return qdm::TimeSeries(fs, sigma * qdm::white_noise(g, seed, qdm::NoiseStream::Bhd1));
}

qdm::TimeSeries tone(double fs, double seconds, double amplitude, double freq) {
  const qdm::SampleGrid g = qdm::make_grid(fs, seconds);
  return qdm::TimeSeries(fs, (amplitude * (2 * pi * freq * qdm::time_grid(g)).sin()).matrix());
}

qdm::Spectrum flat_db(double level, Eigen::Index bins) {
  qdm::Spectrum s;
  s.sample_rate = 2.0 * double(bins - 1);
  s.segment_length = 2 * (bins - 1);
  s.frequencies = Eigen::VectorXd::LinSpaced(bins, 0.0, double(bins - 1));
  s.psd = Eigen::VectorXd::Constant(bins, level);
  s.scale = qdm::SpectrumScale::DbRelShot;
  return s;
}

double integrated(const qdm::Spectrum& s) { return s.psd.sum() * s.resolution(); }

}  // namespace

TEST_CASE("spectrum shape") {
  const qdm::Spectrum s = qdm::welch_psd(noise(16384.0, 5.0, 1), qdm::WelchSettings{});
  CHECK(s.frequencies.size() == 2049);
  CHECK(s.frequencies[0] == 0.0);
  CHECK(s.frequencies[2048] == doctest::Approx(8192.0));
  CHECK(s.resolution() == doctest::Approx(4.0));
  CHECK(s.n_averages == 39);
  CHECK(s.psd.allFinite());
  CHECK(s.psd.minCoeff() >= 0.0);
}

TEST_CASE("Parseval for white noise") {
  for (qdm::Window w : {qdm::Window::Hann, qdm::Window::Rectangular}) {
    const qdm::TimeSeries x = noise(16384.0, 5.0, 2, 1.7);
    const qdm::Spectrum s = qdm::welch_psd(x, 4096, 0.5, w);
    CHECK(integrated(s) == doctest::Approx(x.variance()).epsilon(0.01));
  }
}

TEST_CASE("Parseval for a sinusoid") {
  const qdm::Spectrum s = qdm::welch_psd(tone(16384.0, 5.0, 3.0, 1000.0), qdm::WelchSettings{});
  CHECK(integrated(s) == doctest::Approx(4.5).epsilon(0.01));
}

TEST_CASE("flat white-noise level per bin") {
  // 64 s at 16384 Hz with 1024-sample segments: 2047 averages
  const qdm::Spectrum s = qdm::welch_psd(noise(16384.0, 64.0, 3), 1024, 0.5, qdm::Window::Hann);
  CHECK(s.n_averages >= 64);
  const double level = 1.0 / 8192.0;
  const Eigen::VectorXd interior = s.psd.segment(1, s.psd.size() - 2);
  CHECK((interior.array() / level - 1.0).abs().maxCoeff() < 0.1);
}

TEST_CASE("sinusoid power under the peak") {
  const double a = 2.0;
  const qdm::Spectrum s = qdm::welch_psd(tone(16384.0, 5.0, a, 1000.0), qdm::WelchSettings{});
  double power = 0.0;
  for (Eigen::Index k = 0; k < s.psd.size(); ++k) {
    if (std::abs(s.frequencies[k] - 1000.0) <= 4 * s.resolution()) power += s.psd[k] * s.resolution();
  }
  CHECK(power == doctest::Approx(a * a / 2).epsilon(0.02));
}

TEST_CASE("zero input gives zero spectrum") {
  const qdm::TimeSeries z(1024.0, Eigen::VectorXd::Zero(4096));
  CHECK(qdm::welch_psd(z, 512, 0.5).psd.isZero(0.0));
}

TEST_CASE("repeating aligned segments changes nothing") {
  const qdm::TimeSeries x = noise(1024.0, 4.0, 4);
  Eigen::VectorXd twice(2 * x.size());
  twice << x.samples(), x.samples();
  const qdm::Spectrum a = qdm::welch_psd(x, 512, 0.0);
  const qdm::Spectrum b = qdm::welch_psd(qdm::TimeSeries(1024.0, twice), 512, 0.0);
  CHECK(b.n_averages == 2 * a.n_averages);
  CHECK((a.psd - b.psd).cwiseAbs().maxCoeff() < 1e-12 * a.psd.maxCoeff());
}

TEST_CASE("estimator argument checks") {
  const qdm::TimeSeries x = noise(1024.0, 1.0, 5);
  try {
    qdm::welch_psd(x, 2048, 0.5);
    FAIL("expected SegmentTooLong");
  } catch (const qdm::Error& e) {
    CHECK(e.code() == qdm::ErrorCode::SegmentTooLong);
  }
  CHECK_THROWS_AS(qdm::welch_psd(x, 256, 0.95), qdm::Error);
  CHECK_THROWS_AS(qdm::welch_psd(x, 2, 0.5), qdm::Error);
  CHECK(qdm::parse_window("hann") == qdm::Window::Hann);
  CHECK(qdm::to_string(qdm::Window::Rectangular) == "rectangular");
  CHECK_THROWS_AS(qdm::parse_window("kaiser"), qdm::Error);
}

TEST_CASE("dB relative to shot") {
  const qdm::WelchSettings ws;
  const qdm::Spectrum shot = qdm::welch_psd(noise(16384.0, 5.0, 10), ws);

  SUBCASE("a flat reference against itself is 0 dB in every bin") {
    qdm::Spectrum flat = shot;
    flat.psd.setConstant(1.0 / 8192.0);
    const qdm::Spectrum db = qdm::db_rel_shot(flat, flat);
    CHECK(db.scale == qdm::SpectrumScale::DbRelShot);
    CHECK(db.psd.cwiseAbs().maxCoeff() < 0.5);
  }
  SUBCASE("a measured reference against itself band-medians to 0 dB") {
    const qdm::Spectrum db = qdm::db_rel_shot(shot, shot);
    CHECK(std::abs(qdm::band_level(db, 20.0, 8000.0)) < 0.1);
  }
  SUBCASE("5 dB squeezed noise") {
    const qdm::Spectrum sq = qdm::welch_psd(noise(16384.0, 5.0, 11, std::sqrt(std::pow(10.0, -0.5))), ws);
    const qdm::Spectrum db = qdm::db_rel_shot(sq, shot);
    CHECK(std::abs(db.psd.segment(1, db.psd.size() - 2).mean() + 5.0) < 0.5);
    CHECK(std::abs(qdm::band_level(db, 20.0, 8000.0) + 5.0) < 0.5);
  }
  SUBCASE("ten times the shot variance") {
    const qdm::Spectrum loud = qdm::welch_psd(noise(16384.0, 5.0, 12, std::sqrt(10.0)), ws);
    const qdm::Spectrum db = qdm::db_rel_shot(loud, shot);
    CHECK(std::abs(db.psd.segment(1, db.psd.size() - 2).mean() - 10.0) < 0.5);
  }
  SUBCASE("grid mismatch") {
    const qdm::Spectrum other = qdm::welch_psd(noise(16384.0, 5.0, 13), 2048, 0.5);
    try {
      qdm::db_rel_shot(other, shot);
      FAIL("expected GridMismatch");
    } catch (const qdm::Error& e) {
      CHECK(e.code() == qdm::ErrorCode::GridMismatch);
    }
  }
  SUBCASE("zero reference") {
    qdm::Spectrum zero = shot;
    zero.psd.setZero();
    try {
      qdm::db_rel_shot(shot, zero);
      FAIL("expected ZeroReference");
    } catch (const qdm::Error& e) {
      CHECK(e.code() == qdm::ErrorCode::ZeroReference);
    }
  }
}

TEST_CASE("band level") {
  qdm::Spectrum s = flat_db(-5.0, 1025);
  CHECK(qdm::band_level(s, 100.0, 300.0) == -5.0);

  s.psd[200] = 20.0;
  CHECK(qdm::band_level(s, 150.0, 250.0) == -5.0);

  std::vector<char> mask(std::size_t(s.psd.size()), 0);
  for (std::size_t k = 100; k < 151; ++k) mask[k] = 1;
  s.psd.segment(100, 51).setConstant(30.0);
  const std::unique_ptr<bool[]> flags(new bool[mask.size()]);
  std::transform(mask.begin(), mask.end(), flags.get(), [](char c) { return c != 0; });
  CHECK(qdm::band_level(s, 100.0, 180.0, {flags.get(), mask.size()}) == -5.0);

  try {
    qdm::band_level(s, 10.0, 12.0);
    FAIL("expected EmptyBand");
  } catch (const qdm::Error& e) {
    CHECK(e.code() == qdm::ErrorCode::EmptyBand);
  }
  CHECK_THROWS_AS(qdm::band_level(s, 300.0, 100.0), qdm::Error);
  const bool short_mask[3] = {false, false, false};
  CHECK_THROWS_AS(qdm::band_level(s, 100.0, 300.0, short_mask), qdm::Error);
}

TEST_CASE("matched filter") {
  const double fs = 8192.0;
  const qdm::SampleGrid g = qdm::make_grid(fs, 1.0);
  qdm::ChirpParams c;
  c.duration = 1.0;
  c.t_coalesce = 1.05;
  const qdm::TimeSeries tmpl = qdm::chirp_signal(g, c);

  SUBCASE("template alone") {
    const qdm::MatchedFilterPeak p = qdm::matched_filter_peak(tmpl, tmpl);
    CHECK(p.lag == 0.0);
    CHECK(p.snr > 10.0);
    CHECK(p.value == doctest::Approx(tmpl.samples().norm()).epsilon(1e-9));
  }
  SUBCASE("template amplitude does not matter") {
    const qdm::TimeSeries data(fs, tmpl.samples() + qdm::white_noise(g, 7, qdm::NoiseStream::Bhd2));
    const qdm::TimeSeries scaled(fs, 37.0 * tmpl.samples());
    const qdm::MatchedFilterPeak a = qdm::matched_filter_peak(data, tmpl);
    const qdm::MatchedFilterPeak b = qdm::matched_filter_peak(data, scaled);
    CHECK(a.snr == doctest::Approx(b.snr).epsilon(1e-10));
    CHECK(a.lag == b.lag);
  }
  SUBCASE("delayed template") {
    Eigen::VectorXd shifted = Eigen::VectorXd::Zero(g.size);
    shifted.tail(g.size - 100) = tmpl.samples().head(g.size - 100);
    const qdm::MatchedFilterPeak p = qdm::matched_filter_peak(qdm::TimeSeries(fs, shifted), tmpl);
    CHECK(p.lag == doctest::Approx(100.0 / fs));
  }
  SUBCASE("white noise stays below 5 in at least 99 of 100 seeds") {
    int below = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const qdm::TimeSeries w(fs, qdm::white_noise(g, 1000 + seed, qdm::NoiseStream::Bhd2));
      if (qdm::matched_filter_peak(w, tmpl).snr < 5.0) ++below;
    }
    CHECK(below >= 99);
  }
  SUBCASE("errors") {
    const qdm::TimeSeries zero(fs, Eigen::VectorXd::Zero(g.size));
    try {
      qdm::matched_filter_peak(tmpl, zero);
      FAIL("expected ZeroTemplate");
    } catch (const qdm::Error& e) {
      CHECK(e.code() == qdm::ErrorCode::ZeroTemplate);
    }
    const qdm::TimeSeries other_rate(fs / 2, tmpl.samples());
    CHECK_THROWS_AS(qdm::matched_filter_peak(tmpl, other_rate), qdm::Error);
  }
}
