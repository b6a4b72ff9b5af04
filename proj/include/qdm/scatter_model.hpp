#pragma once

#include <array>
#include <numbers>
#include <utility>

#include <Eigen/Core>

#include "qdm/time_series.hpp"

namespace qdm {

inline constexpr int kScatterOrders = 5;

/// Back-scatter disturbance parameters.
///
/// The scattered light picks up the phase
///   phi(t) = phi0 + (2 pi / lambda) sum_n m_n sin(2 pi f t + phi_n)^n,  n = 1..5
/// and projects into the phase-quadrature detector as A cos phi(t) and into
/// the amplitude-quadrature detector as A' sin(phi(t) + delta_phi).
struct ScatterParams {
  double amplitude = 10.0;              // A, shot-noise units
  double phi0 = 0.3;                    // rad
  double frequency = 5.0;               // f, Hz
  double wavelength = 1064e-9;          // lambda, m
  std::array<double, kScatterOrders> depth{3.0 * 1064e-9, 0.05 * 1064e-9, 0.03 * 1064e-9,
                                           0.02 * 1064e-9, 0.01 * 1064e-9};  // m_n, metres
  std::array<double, kScatterOrders> phase{0.4, 0.2, -0.3, 0.1, 0.25};   // phi_n, rad
  double a_prime = 9.5;                 // A'
  double delta_phi = 0.05;              // rad

  /// Throws InvalidArgument when f, lambda, A or A' are out of range.
  void validate() const;

  /// Modulation depth in radians of optical phase, 2 pi m_n / lambda.
  double depth_rad(int order) const {
    return 2.0 * std::numbers::pi * depth[std::size_t(order - 1)] / wavelength;
  }
};

/// Wrap an angle into (-pi, pi].
double wrap_phase(double angle);

/// The phase phi(t) written as a degree-5 trigonometric polynomial in
/// theta = 2 pi f t:
///   phi = offset + sum_k cos_coeff[k] cos(k theta) + sin_coeff[k] sin(k theta).
/// Every ScatterParams phase has exactly one such form, which is what the
/// fitter iterates on; the map back to (phi0, m_n, phi_n) is many-to-one.
struct PhaseHarmonics {
  double offset = 0.0;
  Eigen::Matrix<double, kScatterOrders, 1> cos_coeff = Eigen::Matrix<double, kScatterOrders, 1>::Zero();
  Eigen::Matrix<double, kScatterOrders, 1> sin_coeff = Eigen::Matrix<double, kScatterOrders, 1>::Zero();

  template <typename Derived>
  Eigen::ArrayXd evaluate(const Eigen::ArrayBase<Derived>& theta) const {
    Eigen::ArrayXd out = Eigen::ArrayXd::Constant(theta.size(), offset);
    for (int k = 1; k <= kScatterOrders; ++k) {
      out += cos_coeff[k - 1] * (double(k) * theta).cos() + sin_coeff[k - 1] * (double(k) * theta).sin();
    }
    return out;
  }

  PhaseHarmonics mirrored() const {
    return {-offset, -cos_coeff, -sin_coeff};
  }
};

/// phi(t) evaluated on an array of times (seconds).
template <typename Derived>
Eigen::ArrayXd scatter_phase(const Eigen::ArrayBase<Derived>& t, const ScatterParams& p) {
  const Eigen::ArrayXd theta = 2.0 * std::numbers::pi * p.frequency * t.derived();
  Eigen::ArrayXd phi = Eigen::ArrayXd::Constant(t.size(), p.phi0);
  for (int n = 1; n <= kScatterOrders; ++n) {
    const double k = p.depth_rad(n);
    if (k == 0.0) continue;
    const Eigen::ArrayXd s = (theta + p.phase[std::size_t(n - 1)]).sin();
    Eigen::ArrayXd power = s;
    for (int j = 1; j < n; ++j) power *= s;
    phi += k * power;
  }
  return phi;
}

double scatter_phase(double t, const ScatterParams& p);

/// Disturbance as seen by (BHD1, BHD2) on the sample grid.
std::pair<Eigen::VectorXd, Eigen::VectorXd> scatter_channels(const SampleGrid& grid, const ScatterParams& p);

/// BHD1 projection A cos phi(t) only.
Eigen::VectorXd scatter_bhd1(const SampleGrid& grid, const ScatterParams& p);
/// BHD2 projection A' sin(phi(t) + delta_phi) only.
Eigen::VectorXd scatter_bhd2(const SampleGrid& grid, const ScatterParams& p);

/// Harmonic form of p's phase (exact for a degree-5 polynomial).
PhaseHarmonics harmonics_of(const ScatterParams& p);

/// Overwrite phi0, depth and phase of p with a set that reproduces the
/// given harmonics exactly. Depths come out non-negative and the phases of
/// order n are taken on the principal branch, then wrapped to (-pi, pi].
void assign_harmonics(ScatterParams& p, const PhaseHarmonics& h);

/// Same waveform, phases wrapped into (-pi, pi].
ScatterParams canonical(ScatterParams p);

}  // namespace qdm
