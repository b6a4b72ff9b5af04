#include "qdm/noise_budget.hpp"

#include <cmath>

namespace qdm {

namespace {

void require_increasing(std::span<const double> values, const char* name) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyGrid, std::string(name) + " is empty");
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be strictly increasing");
    }
  }
}

}  // namespace

BudgetGrid budget_sweep(std::span<const double> r_list, std::span<const double> eta_list) {
  require_increasing(r_list, "r list");
  require_increasing(eta_list, "eta list");

  BudgetGrid grid;
  grid.r_values = Eigen::Map<const Eigen::VectorXd>(r_list.data(), Eigen::Index(r_list.size()));
  grid.eta_values = Eigen::Map<const Eigen::VectorXd>(eta_list.data(), Eigen::Index(eta_list.size()));
  grid.factors.resize(grid.r_values.size(), grid.eta_values.size());
  for (Eigen::Index i = 0; i < grid.r_values.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.eta_values.size(); ++j) {
      grid.factors(i, j) = snr_reduction_factor(NoiseSpec(grid.r_values[i], grid.eta_values[j]));
    }
  }
  return grid;
}

std::vector<double> linear_range(double first, double last, double step) {
  if (!(step > 0.0) || !std::isfinite(first) || !std::isfinite(last) || last < first) {
    throw Error(ErrorCode::InvalidArgument, "range needs first <= last and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 0.5)) + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::min(first + static_cast<double>(i) * step, last));
  }
  // guard against a duplicated end point from the clamp
  if (out.size() >= 2 && out[out.size() - 1] <= out[out.size() - 2]) out.pop_back();
  return out;
}

}  // namespace qdm
