#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qdm/error.hpp"

namespace qdm {

/// Squeezing parameter and interferometer path efficiency. Quadrature
/// variances are normalized so that vacuum has variance 1.
template <typename Scalar>
class BasicNoiseSpec {
 public:
  BasicNoiseSpec(Scalar r, Scalar eta) : r_(r), eta_(eta) {
    using std::isfinite;
    if (!isfinite(r) || r < Scalar(0)) {
      throw Error(ErrorCode::InvalidArgument, "squeezing parameter r must be >= 0");
    }
    if (!isfinite(eta) || !(eta > Scalar(0)) || eta > Scalar(1)) {
      throw Error(ErrorCode::InvalidArgument, "efficiency eta must lie in (0, 1]");
    }
  }

  static BasicNoiseSpec from_db(Scalar squeezing_db, Scalar eta) {
    return BasicNoiseSpec(db_to_r(squeezing_db), eta);
  }

  Scalar r() const { return r_; }
  Scalar eta() const { return eta_; }
  Scalar squeezing_db() const { return r_to_db(r_); }

  /// 10 log10(e^{2r}) = (20 / ln 10) r
  static Scalar r_to_db(Scalar r) { return Scalar(20) / std::numbers::ln10_v<Scalar> * r; }
  static Scalar db_to_r(Scalar db) { return db * std::numbers::ln10_v<Scalar> / Scalar(20); }

 private:
  Scalar r_;
  Scalar eta_;
};

using NoiseSpec = BasicNoiseSpec<double>;

/// Amplitude-quadrature variance of a single squeezed field after the
/// interferometer: 1 - eta + e^{-2r} eta.
template <typename Scalar>
Scalar squeezed_variance(const BasicNoiseSpec<Scalar>& spec) {
  using std::exp;
  const Scalar eta = spec.eta();
  return Scalar(1) - eta + exp(Scalar(-2) * spec.r()) * eta;
}

/// Variance at the signal detector of the two-mode squeezed readout with a
/// balanced output splitter and no loss outside the interferometer.
template <typename Scalar>
Scalar qdm_variance_bhd2(const BasicNoiseSpec<Scalar>& spec) {
  using std::exp;
  using std::sqrt;
  const Scalar eta = spec.eta();
  const Scalar root = sqrt(eta);
  const Scalar r = spec.r();
  return Scalar(0.5) * (Scalar(1) - eta) +
         Scalar(0.25) * exp(Scalar(-2) * r) * (root + Scalar(1)) * (root + Scalar(1)) +
         Scalar(0.25) * exp(Scalar(2) * r) * (root - Scalar(1)) * (root - Scalar(1));
}

/// Single-readout SNR divided by QDM SNR. The QDM signal detector sees half
/// the signal power, hence the leading factor of two.
template <typename Scalar>
Scalar snr_reduction_factor(const BasicNoiseSpec<Scalar>& spec) {
  return Scalar(2) * qdm_variance_bhd2(spec) / squeezed_variance(spec);
}

/// Reduction factors on an (r, eta) grid; row = r, column = eta.
struct BudgetGrid {
  Eigen::VectorXd r_values;
  Eigen::VectorXd eta_values;
  Eigen::MatrixXd factors;

  Eigen::VectorXd squeezing_db() const {
    return r_values * (20.0 / std::numbers::ln10);
  }
  /// Cells above the factor-2 line (the region a plot would leave blank).
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> above_two() const {
    return factors.array() > 2.0;
  }
  double min_factor() const { return factors.minCoeff(); }
};

BudgetGrid budget_sweep(std::span<const double> r_list, std::span<const double> eta_list);

/// Inclusive arithmetic range helper for sweeps; the end point is kept when
/// it lies within half a step of the last value.
std::vector<double> linear_range(double first, double last, double step);

}  // namespace qdm
