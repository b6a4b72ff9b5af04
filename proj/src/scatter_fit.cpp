#include "qdm/scatter_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "qdm/error.hpp"
#include "qdm/levenberg_marquardt.hpp"

namespace qdm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Parameter layout shared by both fitting stages:
//   [A, offset, cos_1..cos_5, sin_1..sin_5, (f)]
constexpr int kAmp = 0;
constexpr int kOffset = 1;
constexpr int kCos = 2;
constexpr int kSin = kCos + kScatterOrders;
constexpr int kFreq = kSin + kScatterOrders;
constexpr int kShapeParams = kFreq;

/// A cos(psi(theta)) with psi a degree-5 trigonometric polynomial. theta is
/// either given directly (folded profile) or 2 pi f t with f optionally free.
class PhaseModelProblem {
 public:
  static PhaseModelProblem on_profile(Eigen::ArrayXd theta, Eigen::ArrayXd y, Eigen::ArrayXd sqrt_weight) {
    return PhaseModelProblem(std::move(theta), std::move(y), std::move(sqrt_weight), false, false, 0.0);
  }

  static PhaseModelProblem on_times(Eigen::ArrayXd t, Eigen::ArrayXd y, bool fit_frequency, double fixed_frequency) {
    Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(y.size());
    return PhaseModelProblem(std::move(t), std::move(y), std::move(ones), true, fit_frequency, fixed_frequency);
  }

  int num_params() const { return fit_frequency_ ? kShapeParams + 1 : kShapeParams; }

  void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const Eigen::Index n = y_.size();
    r.resize(n);
    if (jac) jac->resize(n, num_params());
    const double amp = x[kAmp];
    const double freq = time_based_ ? (fit_frequency_ ? x[kFreq] : fixed_frequency_) : 0.0;
    double ck[kScatterOrders];
    double sk[kScatterOrders];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double theta = time_based_ ? kTwoPi * freq * abscissa_[i] : abscissa_[i];
      ck[0] = std::cos(theta);
      sk[0] = std::sin(theta);
      for (int k = 1; k < kScatterOrders; ++k) {
        ck[k] = ck[k - 1] * ck[0] - sk[k - 1] * sk[0];
        sk[k] = sk[k - 1] * ck[0] + ck[k - 1] * sk[0];
      }
      double psi = x[kOffset];
      double dpsi = 0.0;
      for (int k = 0; k < kScatterOrders; ++k) {
        psi += x[kCos + k] * ck[k] + x[kSin + k] * sk[k];
        dpsi += double(k + 1) * (x[kSin + k] * ck[k] - x[kCos + k] * sk[k]);
      }
      const double cp = std::cos(psi);
      const double w = sqrt_weight_[i];
      r[i] = w * (amp * cp - y_[i]);
      if (!jac) continue;
      const double dmodel_dpsi = -amp * std::sin(psi) * w;
      auto row = jac->row(i);
      row[kAmp] = w * cp;
      row[kOffset] = dmodel_dpsi;
      for (int k = 0; k < kScatterOrders; ++k) {
        row[kCos + k] = dmodel_dpsi * ck[k];
        row[kSin + k] = dmodel_dpsi * sk[k];
      }
      if (fit_frequency_) row[kFreq] = dmodel_dpsi * dpsi * kTwoPi * abscissa_[i];
    }
  }

 private:
  PhaseModelProblem(Eigen::ArrayXd abscissa, Eigen::ArrayXd y, Eigen::ArrayXd sqrt_weight, bool time_based,
                    bool fit_frequency, double fixed_frequency)
      : abscissa_(std::move(abscissa)),
        y_(std::move(y)),
        sqrt_weight_(std::move(sqrt_weight)),
        time_based_(time_based),
        fit_frequency_(fit_frequency),
        fixed_frequency_(fixed_frequency) {}

  Eigen::ArrayXd abscissa_;
  Eigen::ArrayXd y_;
  Eigen::ArrayXd sqrt_weight_;
  bool time_based_;
  bool fit_frequency_;
  double fixed_frequency_;
};

PhaseHarmonics harmonics_from(const Eigen::VectorXd& x) {
  PhaseHarmonics h;
  h.offset = x[kOffset];
  h.cos_coeff = x.segment<kScatterOrders>(kCos);
  h.sin_coeff = x.segment<kScatterOrders>(kSin);
  return h;
}

/// Series folded onto one modulation period: per-bin mean value and mean
/// phase, weighted by the number of samples in the bin.
struct Profile {
  Eigen::ArrayXd theta;
  Eigen::ArrayXd value;
  Eigen::ArrayXd weight;
};

Profile fold(const TimeSeries& series, double frequency, int bins) {
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(bins);
  Eigen::ArrayXd phase_sum = Eigen::ArrayXd::Zero(bins);
  Eigen::ArrayXd count = Eigen::ArrayXd::Zero(bins);
  const double fs = series.sample_rate();
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    const double cycles = frequency * double(i) / fs;
    const double frac = cycles - std::floor(cycles);
    const int b = std::min(bins - 1, int(frac * bins));
    sum[b] += series[i];
    phase_sum[b] += frac;
    count[b] += 1.0;
  }
  const Eigen::Index filled = (count > 0.0).count();
  Profile p;
  p.theta.resize(filled);
  p.value.resize(filled);
  p.weight.resize(filled);
  Eigen::Index j = 0;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0.0) continue;
    p.theta[j] = kTwoPi * phase_sum[b] / count[b];
    p.value[j] = sum[b] / count[b];
    p.weight[j] = count[b];
    ++j;
  }
  return p;
}

/// Phase travel of the profile in units of pi, from hysteresis crossings of
/// +-half the peak value.
int count_fringe_crossings(const Profile& p) {
  const double level = 0.5 * p.value.abs().maxCoeff();
  if (level <= 0.0) return 0;
  int state = 0;
  int crossings = 0;
  // two passes so the circular wrap is counted once the state is known
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const int now = p.value[i] > level ? 1 : (p.value[i] < -level ? -1 : 0);
      if (now != 0 && now != state) {
        if (state != 0 && pass == 1) ++crossings;
        state = now;
      }
    }
  }
  return crossings;
}

double mean_square_lag_difference(const Eigen::VectorXd& x, Eigen::Index lag) {
  const Eigen::Index n = x.size() - lag;
  return (x.tail(n) - x.head(n)).squaredNorm() / double(n);
}

/// Discrete minimum of the lag cost over [lo, hi], refined by a parabola
/// through the neighbouring lags.
double refine_lag_minimum(const Eigen::VectorXd& x, Eigen::Index lo, Eigen::Index hi) {
  lo = std::max<Eigen::Index>(lo, 1);
  hi = std::min<Eigen::Index>(hi, x.size() - 2);
  if (hi <= lo) throw Error(ErrorCode::InsufficientData, "lag search window is empty");
  Eigen::VectorXd cost(hi - lo + 1);
  for (Eigen::Index lag = lo; lag <= hi; ++lag) cost[lag - lo] = mean_square_lag_difference(x, lag);
  Eigen::Index best = 0;
  cost.minCoeff(&best);
  double lag = double(lo + best);
  if (best > 0 && best < cost.size() - 1) {
    const double cm = cost[best - 1];
    const double c0 = cost[best];
    const double cp = cost[best + 1];
    const double curvature = cm - 2.0 * c0 + cp;
    if (curvature > 0.0) lag += 0.5 * (cm - cp) / curvature;
  }
  return lag;
}

struct Candidate {
  double score;
  double depth;      // first-order phase depth, rad
  double phase;      // rad
  double amplitude;
  double offset;
};

/// Grid search over first-order (depth, phase) with A and the offset
/// projected out linearly.
std::vector<Candidate> scan_first_order(const Profile& p, double depth_lo, double depth_hi, int keep) {
  constexpr double kDepthStep = 0.25;
  constexpr double kPhaseResolution = 0.3;  // rad of optical phase
  std::vector<Candidate> grid;
  const Eigen::ArrayXd& w = p.weight;
  for (double depth = depth_lo; depth <= depth_hi + 1e-12; depth += kDepthStep) {
    // (depth, phase + pi) mirrors (depth, phase); cos is even so half a turn suffices
    const double phase_step = std::min(0.2, kPhaseResolution / depth);
    for (double phase = 0.0; phase < std::numbers::pi; phase += phase_step) {
      const Eigen::ArrayXd psi = depth * (p.theta + phase).sin();
      const Eigen::ArrayXd u = psi.cos();
      const Eigen::ArrayXd v = psi.sin();
      const double uu = (w * u * u).sum();
      const double uv = (w * u * v).sum();
      const double vv = (w * v * v).sum();
      const double uy = (w * u * p.value).sum();
      const double vy = (w * v * p.value).sum();
      const double det = uu * vv - uv * uv;
      if (!(det > 1e-12 * uu * vv)) continue;
      const double cu = (vv * uy - uv * vy) / det;
      const double cv = (uu * vy - uv * uy) / det;
      // A cos(offset + psi) = A cos(offset) u - A sin(offset) v
      grid.push_back({cu * uy + cv * vy, depth, phase, std::hypot(cu, cv), std::atan2(-cv, cu)});
    }
  }
  std::sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.score, a.depth, a.phase) < std::tie(a.score, b.depth, b.phase);
  });
  std::vector<Candidate> picked;
  for (const auto& c : grid) {
    if (int(picked.size()) >= keep) break;
    const bool distinct = std::all_of(picked.begin(), picked.end(), [&](const Candidate& q) {
      const double dphase = std::abs(std::remainder(c.phase - q.phase, std::numbers::pi));
      return std::abs(c.depth - q.depth) > 1.0 || dphase * std::max(c.depth, q.depth) > 1.0;
    });
    if (distinct) picked.push_back(c);
  }
  return picked;
}

DampedLsqOptions solver_options(const FitConfig& cfg) {
  DampedLsqOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.cost_tolerance = cfg.cost_tolerance;
  opt.param_tolerance = cfg.param_tolerance;
  opt.damping_init = cfg.damping_init;
  return opt;
}

}  // namespace

void FitConfig::validate() const {
  const bool ok = std::isfinite(f_seed) && f_seed > 0.0 && max_iterations > 0 && cost_tolerance > 0.0 &&
                  param_tolerance > 0.0 && multistart_count >= 1 && damping_init > 0.0 && wavelength > 0.0 &&
                  max_depth > 0.0 && detection_snr > 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "fit configuration values must be positive");
}

double estimate_modulation_frequency(const TimeSeries& series, double f_seed) {
  const double fs = series.sample_rate();
  const Eigen::VectorXd& x = series.samples();
  const double seed_lag = fs / f_seed;
  const double one_period = refine_lag_minimum(x, Eigen::Index(std::floor(seed_lag / 1.1)),
                                               Eigen::Index(std::ceil(seed_lag / 0.9)));
  // A lag of many periods pins the period more tightly.
  const auto periods = std::max<Eigen::Index>(1, Eigen::Index(0.5 * double(x.size()) / one_period));
  if (periods == 1) return fs / one_period;
  const auto centre = Eigen::Index(std::llround(double(periods) * one_period));
  const double many = refine_lag_minimum(x, centre - periods - 3, centre + periods + 3);
  return fs * double(periods) / many;
}

FitResult fit_bhd1(const TimeSeries& series, const FitConfig& cfg) {
  cfg.validate();
  if (series.duration() < 3.0 / cfg.f_seed) {
    throw Error(ErrorCode::InsufficientData, "series is shorter than 3 modulation periods");
  }
  const double rms = series.rms();
  const double frequency = cfg.fix_f ? cfg.f_seed : estimate_modulation_frequency(series, cfg.f_seed);
  const double samples_per_period = series.sample_rate() / frequency;

  const int coarse_bins = std::max(16, std::min(512, int(samples_per_period / 2)));
  const int fine_bins = std::max(16, std::min(2048, int(samples_per_period / 2)));
  const Profile coarse = fold(series, frequency, coarse_bins);
  const Profile fine = fold(series, frequency, fine_bins);

  const double depth_max = kTwoPi * cfg.max_depth;
  const double travel = std::numbers::pi * count_fringe_crossings(coarse) / 4.0;
  double depth_lo = std::max(0.25, 0.7 * travel - std::numbers::pi);
  // more fringes than any allowed depth produces: not a scatter profile, scan everything
  if (depth_lo > depth_max) depth_lo = 0.25;
  const double depth_hi = std::min(depth_max, std::max(depth_lo, 1.3 * travel + std::numbers::pi));
  const std::vector<Candidate> starts = scan_first_order(coarse, depth_lo, depth_hi, cfg.multistart_count);
  if (starts.empty()) throw Error(ErrorCode::DegenerateAmplitude, "no usable start point for the scatter fit");

  const DampedLsqOptions opt = solver_options(cfg);
  const auto profile_problem = PhaseModelProblem::on_profile(fine.theta, fine.value, fine.weight.sqrt());
  const auto full_problem =
      PhaseModelProblem::on_times(series.times(), series.samples().array(), !cfg.fix_f, frequency);

  std::optional<DampedLsqResult> best;
  for (const Candidate& c : starts) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(kShapeParams);
    x0[kAmp] = c.amplitude;
    x0[kOffset] = c.offset;
    x0[kCos] = c.depth * std::sin(c.phase);
    x0[kSin] = c.depth * std::cos(c.phase);
    const DampedLsqResult shaped = damped_least_squares(profile_problem, x0, opt);

    Eigen::VectorXd x1(full_problem.num_params());
    x1.head(kShapeParams) = shaped.x;
    if (!cfg.fix_f) x1[kFreq] = frequency;
    DampedLsqResult full = damped_least_squares(full_problem, x1, opt);
    // strict comparison keeps the earliest restart on ties
    if (!best || full.cost < best->cost) best = std::move(full);
  }

  FitResult result;
  Eigen::VectorXd x = best->x;
  if (x[kAmp] < 0.0) {
    x[kAmp] = -x[kAmp];
    x[kOffset] += std::numbers::pi;
  }
  result.harmonics = harmonics_from(x);
  result.harmonics.offset = wrap_phase(result.harmonics.offset);
  result.params.wavelength = cfg.wavelength;
  result.params.amplitude = x[kAmp];
  result.params.frequency = cfg.fix_f ? frequency : std::abs(x[kFreq]);
  assign_harmonics(result.params, result.harmonics);
  result.params.a_prime = result.params.amplitude;
  result.params.delta_phi = 0.0;
  result.cost = best->cost;
  result.cost_history = best->cost_history;
  result.converged = best->converged;
  result.iterations = best->iterations;
  result.restarts_used = int(starts.size());
  const double n = double(series.size());
  result.residual_rms = std::sqrt(2.0 * best->cost / n);

  // The fitted waveform must stand out of the residual the way a matched
  // filter would see it: SNR^2 = sum(model^2) / residual variance.
  const double model_energy = 0.5 * x[kAmp] * x[kAmp] * n;
  const double residual_var = 2.0 * best->cost / n;
  const bool weak = residual_var > 0.0 && model_energy < cfg.detection_snr * cfg.detection_snr * residual_var;
  if (x[kAmp] < 1e-3 * rms || weak) {
    std::ostringstream msg;
    msg << "fitted amplitude " << x[kAmp] << " is not distinguishable from the residual (rms " << result.residual_rms
        << ")";
    throw Error(ErrorCode::DegenerateAmplitude, msg.str());
  }
  return result;
}

Projection fit_bhd2_projection(const TimeSeries& series, const Eigen::ArrayXd& phi_trajectory) {
  if (phi_trajectory.size() != series.size()) {
    throw Error(ErrorCode::IncompatibleGrids, "phase trajectory length differs from the series");
  }
  const Eigen::ArrayXd s = phi_trajectory.sin();
  const Eigen::ArrayXd c = phi_trajectory.cos();
  const Eigen::ArrayXd y = series.samples().array();
  Eigen::Matrix2d normal;
  normal << (s * s).sum(), (s * c).sum(), (s * c).sum(), (c * c).sum();
  const Eigen::Vector2d rhs((s * y).sum(), (c * y).sum());
  const Eigen::Vector2d eig = normal.selfadjointView<Eigen::Lower>().eigenvalues();
  if (!(eig[0] > 1e-10 * eig[1])) {
    throw Error(ErrorCode::SingularDesign, "sin(phi) and cos(phi) are collinear; phi is nearly constant");
  }
  const Eigen::Vector2d coeff = normal.ldlt().solve(rhs);
  return {std::hypot(coeff[0], coeff[1]), std::atan2(coeff[1], coeff[0])};
}

TimeSeries subtract_disturbance(const TimeSeries& series, const ScatterParams& params) {
  params.validate();
  if (params.a_prime == 0.0) return series;
  const Eigen::VectorXd model = scatter_bhd2(series.grid(), params);
  return TimeSeries(series.sample_rate(), series.samples() - model, series.unit());
}

RecoveryResult run_recovery(const Dataset& data, const FitConfig& cfg) {
  require_compatible(data.bhd1, data.bhd2);
  FitResult fit;
  try {
    fit = fit_bhd1(data.bhd1, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateAmplitude) throw;
    return {std::nullopt, data.bhd2, true, std::string("pass-through: ") + e.what()};
  }

  Projection proj = fit_bhd2_projection(data.bhd2, scatter_phase(data.bhd2.times(), fit.params));
  if (std::abs(proj.delta_phi) > 0.5 * std::numbers::pi) {
    // phi -> -phi leaves A cos phi unchanged and maps delta_phi -> pi - delta_phi
    fit.harmonics = fit.harmonics.mirrored();
    assign_harmonics(fit.params, fit.harmonics);
    proj.delta_phi = wrap_phase(std::numbers::pi - proj.delta_phi);
  }
  fit.params.a_prime = proj.a_prime;
  fit.params.delta_phi = proj.delta_phi;
  TimeSeries cleaned = subtract_disturbance(data.bhd2, fit.params);
  std::string note = fit.converged ? "subtracted" : "subtracted (fit did not meet its convergence tolerance)";
  return {std::move(fit), std::move(cleaned), false, std::move(note)};
}

}  // namespace qdm
