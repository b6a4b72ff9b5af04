#include "qdm/scatter_model.hpp"

#include <cmath>
#include <complex>

#include "qdm/error.hpp"

namespace qdm {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

cplx harmonic(const PhaseHarmonics& h, int k) {
  return {h.cos_coeff[k - 1], -h.sin_coeff[k - 1]};
}

}  // namespace

void ScatterParams::validate() const {
  if (!std::isfinite(frequency) || !(frequency > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scatter frequency must be positive");
  }
  if (!std::isfinite(wavelength) || !(wavelength > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "wavelength must be positive");
  }
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "scatter amplitude A must be >= 0");
  }
  if (!std::isfinite(a_prime) || a_prime < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "BHD2 amplitude A' must be >= 0");
  }
  for (int n = 0; n < kScatterOrders; ++n) {
    if (!std::isfinite(depth[n]) || !std::isfinite(phase[n])) {
      throw Error(ErrorCode::InvalidArgument, "scatter depths and phases must be finite");
    }
  }
  if (!std::isfinite(phi0) || !std::isfinite(delta_phi)) {
    throw Error(ErrorCode::InvalidArgument, "scatter phases must be finite");
  }
}

double wrap_phase(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, two_pi);  // [-pi, pi]
  if (wrapped <= -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

double scatter_phase(double t, const ScatterParams& p) {
  Eigen::ArrayXd one(1);
  one[0] = t;
  return scatter_phase(one, p)[0];
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> scatter_channels(const SampleGrid& grid, const ScatterParams& p) {
  p.validate();
  const Eigen::ArrayXd phi = scatter_phase(time_grid(grid), p);
  Eigen::VectorXd bhd1 = (p.amplitude * phi.cos()).matrix();
  Eigen::VectorXd bhd2 = (p.a_prime * (phi + p.delta_phi).sin()).matrix();
  return {std::move(bhd1), std::move(bhd2)};
}

Eigen::VectorXd scatter_bhd1(const SampleGrid& grid, const ScatterParams& p) {
  p.validate();
  return (p.amplitude * scatter_phase(time_grid(grid), p).cos()).matrix();
}

Eigen::VectorXd scatter_bhd2(const SampleGrid& grid, const ScatterParams& p) {
  p.validate();
  return (p.a_prime * (scatter_phase(time_grid(grid), p) + p.delta_phi).sin()).matrix();
}

PhaseHarmonics harmonics_of(const ScatterParams& p) {
  // A degree-5 trigonometric polynomial is reproduced exactly by a DFT with
  // more than 10 nodes.
  constexpr int nodes = 32;
  const Eigen::ArrayXd theta =
      Eigen::ArrayXd::LinSpaced(nodes, 0.0, double(nodes - 1)) * (2.0 * std::numbers::pi / nodes);
  Eigen::ArrayXd phi = Eigen::ArrayXd::Constant(nodes, p.phi0);
  for (int n = 1; n <= kScatterOrders; ++n) {
    phi += p.depth_rad(n) * (theta + p.phase[std::size_t(n - 1)]).sin().pow(double(n));
  }
  PhaseHarmonics h;
  h.offset = phi.mean();
  for (int k = 1; k <= kScatterOrders; ++k) {
    h.cos_coeff[k - 1] = 2.0 / nodes * (phi * (double(k) * theta).cos()).sum();
    h.sin_coeff[k - 1] = 2.0 / nodes * (phi * (double(k) * theta).sin()).sum();
  }
  return h;
}

void assign_harmonics(ScatterParams& p, const PhaseHarmonics& h) {
  // Peel orders from the top: sin^n only reaches harmonics n, n-2, ...
  //   sin^2 = 1/2 - cos2x/2
  //   sin^3 = 3/4 sin x - 1/4 sin3x
  //   sin^4 = 3/8 - cos2x/2 + cos4x/8
  //   sin^5 = 5/8 sin x - 5/16 sin3x + sin5x/16
  const cplx z5 = 16.0 * kI * harmonic(h, 5);
  const double k5 = std::abs(z5);
  const double phi5 = std::arg(z5) / 5.0;

  const cplx z4 = 8.0 * harmonic(h, 4);
  const double k4 = std::abs(z4);
  const double phi4 = std::arg(z4) / 4.0;

  const cplx c3 = harmonic(h, 3) - (5.0 / 16.0) * kI * k5 * std::polar(1.0, 3.0 * phi5);
  const cplx z3 = -4.0 * kI * c3;
  const double k3 = std::abs(z3);
  const double phi3 = std::arg(z3) / 3.0;

  const cplx c2 = harmonic(h, 2) + 0.5 * k4 * std::polar(1.0, 2.0 * phi4);
  const cplx z2 = -2.0 * c2;
  const double k2 = std::abs(z2);
  const double phi2 = std::arg(z2) / 2.0;

  const cplx c1 = harmonic(h, 1) + kI * (0.75 * k3 * std::polar(1.0, phi3) + 0.625 * k5 * std::polar(1.0, phi5));
  const cplx z1 = kI * c1;

  const double to_metres = p.wavelength / (2.0 * std::numbers::pi);
  p.depth = {std::abs(z1) * to_metres, k2 * to_metres, k3 * to_metres, k4 * to_metres, k5 * to_metres};
  p.phase = {wrap_phase(std::arg(z1)), wrap_phase(phi2), wrap_phase(phi3), wrap_phase(phi4), wrap_phase(phi5)};
  p.phi0 = wrap_phase(h.offset - 0.5 * k2 - 0.375 * k4);
}

ScatterParams canonical(ScatterParams p) {
  p.phi0 = wrap_phase(p.phi0);
  p.delta_phi = wrap_phase(p.delta_phi);
  for (auto& ph : p.phase) ph = wrap_phase(ph);
  return p;
}

}  // namespace qdm
